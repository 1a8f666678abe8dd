"""Configs, the worker pool and the command line.

Run with ``python3 tutorials/06_harness.py``; output goes to a temp directory.
"""

import os
import tempfile

from qwtsim.cli import main
from qwtsim.harness import config_to_ini, load_config

cfg = load_config(overrides={"nq": "5,6", "model": "noisy", "eps": "1e-2..1e-1:3", "seeds": "0..1"})
print(config_to_ini(cfg))

out = tempfile.mkdtemp()
with open(os.path.join(out, "scan.ini"), "w") as fh:
    fh.write(config_to_ini(cfg))

# Same as: qwtsim fidelity-scan --config scan.ini --out ...
rc = main(["fidelity-scan", "--config", os.path.join(out, "scan.ini"), "--out", os.path.join(out, "scan")])
print("exit code", rc)
print(sorted(os.listdir(os.path.join(out, "scan"))))
print(open(os.path.join(out, "scan", "scan.csv")).read())
