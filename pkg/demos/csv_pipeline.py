"""End to end through the command line, as one would with real data.

Run: python demos/csv_pipeline.py [workdir]

Every step below is one `adaptapprox` invocation; the same commands work on
any directory holding features.csv, labels.txt and costs.txt.
"""

import sys
import tempfile
from pathlib import Path

from adaptapprox.cli import main

work = Path(sys.argv[1] if len(sys.argv) > 1 else tempfile.mkdtemp(prefix="adaptapprox-"))
d = work / "data"


def step(*argv):
    argv = [str(a) for a in argv]
    print("$ adaptapprox", " ".join(argv))
    main(argv)


step("synth", "1", "--out", d, "--split", "0.6,0.2,0.2")
step("train-f0", "--data", d / "train", "--trees", 100, "--depth", 3,
     "--model-out", work / "f0.model", "--scores-out", work / "train.scores",
     "--apply", d / "validation", work / "val.scores", "--apply", d / "test", work / "test.scores")
step("sweep", "--trainer", "adapt_gbrt", "--train", d / "train", "--train-f0", work / "train.scores",
     "--val", d / "validation", "--val-f0", work / "val.scores",
     "--test", d / "test", "--test-f0", work / "test.scores",
     "--gammas", "0.001,0.01", "--p-fulls", "0.3,0.6", "--shrinkages", "0.3,1.0",
     "--T", 5, "--depth", 2, "--outer-iters", 10,
     "--points-out", work / "points.csv", "--frontier-out", work / "frontier.csv", "--gnuplot")
step("frontier", "--points", work / "points.csv", "--out", work / "frontier2.csv", "--budget", 2.0)
step("adapt", "--trainer", "adapt_gbrt", "--data", d / "train", "--f0-scores", work / "train.scores",
     "--f0-model", work / "f0.model", "--out", work / "chosen.system",
     "--p-full", 0.6, "--T", 5, "--depth", 2, "--outer-iters", 30, "--shrinkage", 1.0)
# the bundle references f0.model, so no scores are needed at evaluation time
step("eval", "--system", work / "chosen.system", "--data", d / "test", "--report", work / "report.csv")
print("outputs in", work)
