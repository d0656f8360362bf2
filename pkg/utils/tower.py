def tower(k: int) -> int:
    """Returns 2⇑k, where 2⇑0 = 1 and 2⇑k = 2 ** (2⇑(k - 1))."""
    if k < 0:
        raise ValueError(f"tower height must be non-negative, got {k}")
    value = 1
    for _ in range(k):
        value = 2**value
    return value
