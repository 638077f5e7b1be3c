"""64-bit word arithmetic and small-integer tagging."""

WORD_BITS = 64
WORD_BYTES = 8
MASK = (1 << WORD_BITS) - 1
SIGN_BIT = 1 << (WORD_BITS - 1)

# immediates carry 63 bits of payload
SMALLINT_MIN = -(1 << 62)
SMALLINT_MAX = (1 << 62) - 1


def wrap(value):
    return value & MASK


def signed(word):
    word &= MASK
    return word - (1 << WORD_BITS) if word & SIGN_BIT else word


def is_smallint(oop):
    return oop & 1 == 1


def tag(value):
    """Encode an integer as an immediate Oop, truncating to 63 bits."""
    return ((value << 1) | 1) & MASK


def untag(oop):
    return wrap(signed(oop) >> 1)


def fits_smallint(value):
    return SMALLINT_MIN <= value <= SMALLINT_MAX
