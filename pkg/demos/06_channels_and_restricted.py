# %% [markdown]
# # Channel laws, the U_n gate, and restricted excitations

# %%
import numpy as np

from qdouble.cli import run_config
from qdouble.experiments import purification_experiment, un_check
from qdouble.group_core import builtin_group
from qdouble.string_ops import build_Un, un_closed_form

# %% [markdown]
# U_n is a ladder of CNOTs around a Hadamard. Its closed form is
# (X_1 + Z_1 ... Z_n) / sqrt 2.

# %%
print(np.round(build_Un(2).real, 3))
print(np.allclose(build_Un(2), un_closed_form(2)))
print(un_check(6).summary())

# %% [markdown]
# The vertex channel, applied to one vertex star in isolation, is a
# purification: it sends any input density to the same pure state.

# %%
Z2, S3 = builtin_group("Z2"), builtin_group("S3")
print(purification_experiment([(Z2, [True, True, False, False]), (S3, [True, False])], seed=3).summary())

# %% [markdown]
# Restricted excitations: operators that break the layer gluing but keep
# overlap with the identity-flux reference positive at every step.

# %%
rep = run_config({"experiment": "restricted"})
for row in rep.details["history"]:
    print(row)
