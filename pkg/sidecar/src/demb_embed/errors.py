class EmbedError(Exception):
    """Job-level failure: bad inputs, unusable model, nothing to embed."""
