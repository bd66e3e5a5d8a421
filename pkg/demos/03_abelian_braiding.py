# %% [markdown]
# # Detecting an abelian braid with one ancilla
#
# On the Z2 doubled state, a controlled gate built from a Z-string and an
# X-string creates a superposition whose odd branch picks up a -1 under a
# small Wilson loop. Reading out a flux ancilla afterwards shows the X-string
# went past the detection face.

# %%
from qdouble.experiments import abelian_braiding, default_abelian_geometry
from qdouble.group_core import builtin_group
from qdouble.lattice import torus

lat = torus(3, 3)
geom = default_abelian_geometry(lat)
print(geom.to_dict())

# %%
report = abelian_braiding(lat, builtin_group("Z2"), geom)
print(report.summary())

# %% [markdown]
# The ancilla reads 0 before the string is applied and 1 afterwards.

# %%
q = report.quantities
print("before:", q["prob_down(rho)"].value, " after:", q["prob_down(rho')"].value)
