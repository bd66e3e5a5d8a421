# %% [markdown]
# # Comb strings, closed loops and elongation
#
# A comb multiplies its base edges by prefix-conjugated copies of g and fixes
# the teeth so that no vertex outside the endpoints is excited.

# %%
from qdouble.experiments import elongation_check, prepare_ground_state
from qdouble.group_core import builtin_group
from qdouble.lattice import face_loop_spec, loop_class, torus
from qdouble.string_ops import closed_loop_action_defect

D4 = builtin_group("D4")
lat = torus(3, 2)
rho = prepare_ground_state(lat, D4)

# %% [markdown]
# A contractible loop around two faces leaves the ground state untouched.

# %%
loop = face_loop_spec(lat, [lat.face(0, 0), lat.face(1, 0)], lat.vertex(0, 0))
print("winding:", loop_class(lat, loop).winding)
for g in range(D4.order):
    print(D4.label(g), closed_loop_action_defect(rho, loop, g))

# %% [markdown]
# Extending a comb by one edge is a controlled multiplication on the new tooth.
# Conjugating the short comb by it reproduces the long one.

# %%
rep = elongation_check(torus(4, 4), [builtin_group("S3"), D4], samples=200, seed=1)
print(rep.summary())
print("flag defects [S3]:", rep.details["flag_defects[S3]"])
