# %% [markdown]
# # Non-abelian braiding in S3
#
# A closed comb C(g) around one face and an open comb L(h) that crosses it.
# Applying them in the two orders differs exactly when g and h do not commute:
# the face where the strings meet ends up carrying flux [g, h].

# %%
from qdouble.experiments import commutator_census, nonabelian_braiding, prepare_ground_state
from qdouble.group_core import builtin_group
from qdouble.lattice import torus

S3 = builtin_group("S3")
lat = torus(2, 2)
rho = prepare_ground_state(lat, S3)

# %%
for g, h in [("(12)", "(123)"), ("(123)", "(132)"), ("(12)", "(23)")]:
    rep = nonabelian_braiding(lat, S3, g, h, state=rho)
    d = rep.details
    print(f"g={g:6s} h={h:6s}  <B_f>(rho1)={d['<B_f>(rho1)']:.4f}  <B_f>(rho2)={d['<B_f>(rho2)']:.4f}"
          f"  census={d['census_identity_fraction']:.4f}  {'PASS' if rep.passed else 'FAIL'}")

# %% [markdown]
# The census averages [a g a^-1, h] over conjugates of g. It matches the
# simulated flux probability in each row above.

# %%
census = commutator_census(S3, S3.element("(12)"), S3.element("(23)"))
print({S3.label(k): round(v, 4) for k, v in census.items()})

# %% [markdown]
# A 3x3 torus gives the same numbers and leaves more neighbouring faces to
# check. Expect roughly half a minute.

# %%
big = torus(3, 3)
rep = nonabelian_braiding(big, S3, "(12)", "(123)")
print("neighbours untouched:", rep.details["neighbor_faces"], "pass:", rep.passed)
