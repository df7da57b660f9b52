"""Tree-automatic presentations of ordinals and linear orderings."""

__version__ = "0.1.0"
