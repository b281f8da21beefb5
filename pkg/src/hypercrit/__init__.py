"""Critical exponents, shadows and invariant random subgroups on free-group trees."""

__version__ = "0.1.0"
