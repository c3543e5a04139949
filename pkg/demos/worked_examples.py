"""
Identifying bees from noisy tags
================================

Eight bees carry the eight codewords of a [7, 3] simplex code. A camera reads
the tags in some unknown order, and some bits come back erased. Which tag
belongs to which bee?

Run with ``python3 demos/worked_examples.py``.
"""

from beeid import presets
from beeid.codes import ErasedWord, parse_bits
from beeid.identifiers import distance_matrix, erasure_graph, jedi, jldi, jmdi, pruned_graph

cb = presets.example1_simplex()
for i, x in enumerate(cb.codewords):
    print(f"x{i + 1} = {cb.word(i)}")

# %%
# A set of erased outputs that pins down every bee
# ------------------------------------------------
#
# The input-output graph joins a codeword to every output it could have
# produced. Peeling off degree-one nodes recovers the whole matching.

outputs = [ErasedWord.parse(y) for y in presets.EXAMPLE1A_OUTPUTS]
g = erasure_graph(cb, outputs)
print(f"\n{g.num_edges} edges in the input-output graph")

res = jedi(cb, outputs)
print("outcome:", res.outcome.value)
print("peeling order:", " ".join(f"x{i + 1}y{j + 1}" for i, j in res.order))
print("assignment:", {f"x{i + 1}": f"y{j + 1}" for i, j in enumerate(res.sigma)})

# %%
# One erasure too many
# --------------------
#
# With a different set of outputs, peeling stalls on a 4-cycle: two bees
# could each own either of two outputs, so the joint decoder declines to guess.

res = jedi(cb, presets.EXAMPLE1B_OUTPUTS)
print("\noutcome:", res.outcome.value, f"({res.reason})")
print("left over:", " ".join(f"x{i + 1}y{j + 1}" for i, j in res.residual))

# %%
# Bit flips instead of erasures
# -----------------------------
#
# On a binary symmetric channel nothing is certain, so the joint decoder
# minimises the total Hamming distance over all assignments.

cb2 = presets.example2()
ys = [parse_bits(y) for y in presets.EXAMPLE2_OUTPUTS]
print("\ncost matrix:")
for row in distance_matrix(cb2, ys):
    print("  ", row)
m = jmdi(cb2, ys)
print("JMDI:", m.sigma, "cost", m.cost)

# Pruning every pair farther apart than R = 2 leaves a sparse graph with the
# same optimum.
pg = pruned_graph(cb2, ys, 2)
print(f"pruned graph keeps {pg.num_edges} of 16 edges")
l = jldi(cb2, ys, 2)
print("JLDI:", l.sigma, "cost", l.cost)
