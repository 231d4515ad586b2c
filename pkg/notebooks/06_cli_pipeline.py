# %% [markdown]
# # Command-line pipeline
#
# Every capability is also reachable from `pcmass <command> --config run.json`.
# This notebook drives the same entry point in-process on the sample configs.

# %%
import json
from pathlib import Path

from pcmass import cli

here = Path(__file__).resolve().parent / "configs"

# %%
cli.main(["check", "--config", str(here / "n3_quick.json")])

# %%
out = Path("/tmp/pcmass_mass.json")
status = cli.main(["mass", "--config", str(here / "n3_quick.json"), "--out", str(out), "--threads", "0"])
print("exit", status)
print(json.dumps(json.loads(out.read_text()), indent=2))

# %%
cli.main(["ionize", "--config", str(here / "table_i.json")])
