# %% [markdown]
# # Preparing the doubled ground state
#
# Start from all-identity edges in both layers and apply the vertex-averaging
# channel at every vertex. The result is stored sparsely: one row per
# (ket, bra) configuration pair.

# %%
from qdouble.doubled_state import initial_state, trace_of_rho
from qdouble.experiments import prepare_ground_state, verify_ground_state
from qdouble.group_core import builtin_group
from qdouble.lattice import torus
from qdouble.operators import apply_channel_Ev

lat = torus(3, 3)
Z2 = builtin_group("Z2")

state = initial_state(lat, Z2)
for v in range(lat.vertex_count):
    state = apply_channel_Ev(state, v)
    print(f"after vertex {v}: {len(state):4d} rows, trace {trace_of_rho(state).real:.12f}")

# %% [markdown]
# The support ends at |G|^(V-1): one global gauge transformation acts trivially.

# %%
print(len(state), "==", Z2.order ** (lat.vertex_count - 1))

# %% [markdown]
# Every stabilizer family is pinned at 1, both layers glued together.

# %%
print(verify_ground_state(state).summary())

# %% [markdown]
# Same story for S3 on a 2x2 torus.

# %%
S3 = builtin_group("S3")
print(verify_ground_state(prepare_ground_state(torus(2, 2), S3)).summary())
