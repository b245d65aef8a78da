"""Driving the sqc command line and reading its JSON report."""

import json
import subprocess
import sys


def sqc(*args):
    proc = subprocess.run([sys.executable, "-m", "sqc", *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout


code, out = sqc("check", "--catalog", "sq_norm", "--gamma", "2", "--conditions", "definition,no_integral",
                "--format", "json")
rep = json.loads(out)
print("exit", code, rep["exit_status"]["rationale"])
for s in rep["verdict_summaries"]:
    print(f"  {s['condition']:12s} {s['counts']}")

code, out = sqc("check", "--catalog", "example1_g", "--gamma", "0.1")
print(f"\nexit {code}\n{out}")

code, out = sqc("construction", "--catalog", "sq_norm", "--x", "0", "--y", "1", "--t", "0.5",
                "--gamma", "2", "--n-list", "1,2,4", "--format", "csv")
print(out)
