# %% [markdown]
# # Finite groups as multiplication tables
#
# Every group is a dense Cayley table of small integers. Labels are for
# humans; all arithmetic happens on indices.

# %%
from qdouble.group_core import builtin_group, format_group, parse_group, is_isomorphic

S3 = builtin_group("S3")
print(S3, "identity:", S3.label(S3.identity))
print("table:\n", S3.mul_table)

# %% [markdown]
# Conjugacy classes and commutators drive everything non-abelian later on.

# %%
for cls in S3.conjugacy_classes.classes:
    print([S3.label(a) for a in cls])

g, h = S3.element("(12)"), S3.element("(123)")
print("[g, h] =", S3.label(S3.commutator(g, h)))

# %% [markdown]
# Groups round-trip through a plain-text table format.

# %%
text = format_group(builtin_group("D4"))
print(text)
D4 = parse_group(text)
print("isomorphic to the builtin:", is_isomorphic(D4, builtin_group("D4")))
print("isomorphic to Q8:", is_isomorphic(D4, builtin_group("Q8")))
