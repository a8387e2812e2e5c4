class SchemaMismatch(Exception):
    """Input CSV missing, malformed, or inconsistent with its peers."""
