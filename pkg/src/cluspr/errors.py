class DataError(ValueError):
    """Input data is malformed or inconsistent (CLI exit code 2)."""
