"""The two worked example codes and their channel outputs.

The simplex code keeps the codeword order used in its worked example (by
message weight, then lexicographically) rather than little-endian message
order, so that codeword labels and peeling order line up with it.
"""

from .codes import Codebook, build_linear_code, parse_bits

EXAMPLE1_GENERATOR = ("1000111", "0101011", "0011101")
EXAMPLE1_CODEWORDS = (
    "0000000", "1000111", "0101011", "0011101",
    "1101100", "1011010", "0110110", "1110001",
)
EXAMPLE1A_OUTPUTS = (
    "00?????", "001????", "??????0", "?0?0?1?",
    "11????0", "????001", "0??????", "????110",
)
# As printed, y7 repeats y3 and no output is compatible with 0101011, so the
# graph has no perfect matching. The drawn graph joins x3 to y7, which fixes
# y7 = 0101011; EXAMPLE1B_OUTPUTS uses that reading.
EXAMPLE1B_OUTPUTS_AS_PRINTED = (
    "0000000", "?0??1?1", "0110110", "?0??1?1",
    "1101100", "1110001", "0110110", "1011010",
)
EXAMPLE1B_OUTPUTS = (
    "0000000", "?0??1?1", "0110110", "?0??1?1",
    "1101100", "1110001", "0101011", "1011010",
)

EXAMPLE2_GENERATOR = ("11100", "00111")
EXAMPLE2_OUTPUTS = ("10000", "11101", "00011", "10001")
EXAMPLE2_COSTS = (
    (1, 4, 2, 2),
    (2, 1, 5, 3),
    (4, 3, 1, 3),
    (3, 2, 2, 2),
)
# radius-2 pruning of EXAMPLE2_COSTS; None marks a missing edge
EXAMPLE2_PRUNED_COSTS = (
    (1, None, 2, 2),
    (2, 1, None, None),
    (None, None, 1, None),
    (None, 2, 2, 2),
)


def example1_simplex() -> Codebook:
    return Codebook(
        7,
        tuple(parse_bits(w) for w in EXAMPLE1_CODEWORDS),
        tuple(parse_bits(w) for w in EXAMPLE1_GENERATOR),
        "example1-simplex",
    )


def example2() -> Codebook:
    return build_linear_code(EXAMPLE2_GENERATOR, name="example2")


PRESETS = {
    "example1-simplex": example1_simplex,
    "example2": example2,
}
