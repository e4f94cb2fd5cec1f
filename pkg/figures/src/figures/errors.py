class FigureError(ValueError):
    """Malformed input CSV or invalid figure options."""
