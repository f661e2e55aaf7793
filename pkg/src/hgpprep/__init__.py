"""Single-shot preparation of hypergraph product codes by thickening."""

__version__ = "0.1.0"
