# %% [markdown]
# # Command-line runs
#
# A run file describes the grating, an optional sweep and the tasks; the
# command writes CSV tables and a JSON report.

# %%
import json
import tempfile
from pathlib import Path

from cylgrating.cli import main

RUN = """[grating]
theta_i = 60
phi_i = 30
eps_r = 2.25
krd = 0.1
a_over_d = 0.05

[sweep]
a_over_d = 0.025, 0.05, 0.1

[run]
tasks = solve_exact, compare
"""

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "run.ini"
    path.write_text(RUN)
    code = main(["--config", str(path), "--out", str(Path(tmp) / "out"), "--quiet"])
    report = json.loads((Path(tmp) / "out" / "report.json").read_text())
    print("exit status", code, "files", sorted(p.name for p in (Path(tmp) / "out").iterdir()))
    print(json.dumps(report["fits"]["remainder_exponents"]["1"], indent=2))
