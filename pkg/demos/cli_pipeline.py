"""
=====================
Command-line pipeline
=====================

The same workflow through the ``decigrad`` command: build a dataset, train,
attribute one image with adaptive IDG and run the saturation experiment.
Everything lands in a temporary directory; rerunning gives identical bytes.
"""

# %%

import tempfile
from pathlib import Path

from decigrad.cli import main

out = Path(tempfile.mkdtemp(prefix="decigrad-demo-"))


def run(*argv):
    print("$ decigrad", " ".join(str(a) for a in argv))
    code = main([str(a) for a in argv])
    print(f"(exit {code})\n")


run("make-data", "--out", out / "data", "--count", 60, "--seed", 7)
run("train", "--data", out / "data", "--out", out / "model", "--epochs", 10, "--seed", 7)
run("attribute", "--model", out / "model" / "model.dgnet", "--image", out / "data" / "img_0000.pgm",
    "--method", "idg-as", "--out", out / "attr")
run("experiment", "saturation", "--model", out / "model" / "model.dgnet",
    "--image", out / "data" / "img_0000.pgm", "--out", out / "sat")

print("files:", sorted(str(p.relative_to(out)) for p in out.rglob("*.csv")))
