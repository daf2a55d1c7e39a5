"""End-to-end checks of the command-line tool: exit codes and output files."""

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(cli, *args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


def strip_column(text, name):
    rows = list(csv.reader(text.splitlines()))
    k = rows[0].index(name)
    return [r[:k] + r[k + 1:] for r in rows]


def main(cli, scenario_dir):
    failures = []

    def check(cond, what):
        print(("ok   " if cond else "FAIL ") + what)
        if not cond:
            failures.append(what)

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        a, b = tmp / "a", tmp / "b"
        r = run(cli, "run", "--scenario", "four_agent_cylinder", "--seed", "7", "--out", str(a))
        check(r.returncode == 0, "run four_agent_cylinder exits 0")
        names = {"trajectory.csv", "solver.csv", "metrics.json"}
        check({p.name for p in a.iterdir()} == names, "run writes the three output files")
        header = (a / "trajectory.csv").read_text().splitlines()[0]
        check(header == "t,agent,px,py,pz,vx,vy,vz,phi,theta,T_cmd,phi_ref,theta_ref",
              "trajectory header")
        solver_header = (a / "solver.csv").read_text().splitlines()[0]
        check(solver_header == "t,solve_ms,inner_iters,outer_iters,residual,infeasibility",
              "solver header")
        metrics = json.loads((a / "metrics.json").read_text())
        check(metrics["seed"] == 7 and metrics["scenario"] == "four_agent_cylinder",
              "metrics name the run")

        r = run(cli, "run", "--scenario", "four_agent_cylinder", "--seed", "7", "--out", str(b))
        check(r.returncode == 0, "second run exits 0")
        check((a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes(),
              "trajectory CSV byte-identical across runs")
        check(strip_column((a / "solver.csv").read_text(), "solve_ms")
              == strip_column((b / "solver.csv").read_text(), "solve_ms"),
              "solver CSV identical apart from wall time")

        f = tmp / "f"
        r = run(cli, "run", "--scenario", str(Path(scenario_dir) / "four_agent_cylinder.json"),
                "--seed", "7", "--out", str(f))
        check(r.returncode == 0, "run from a scenario file exits 0")
        check((a / "trajectory.csv").read_bytes() == (f / "trajectory.csv").read_bytes(),
              "scenario file reproduces the built-in run")

        r = run(cli, "run", "--scenario", "nosuch", "--out", str(tmp / "n"))
        check(r.returncode == 1, "unknown scenario exits 1")
        check("nosuch" in r.stderr, "diagnostic names the unknown scenario")

        r = run(cli, "bench", "--agents", "2..4", "--trials", "1", "--seed", "1",
                "--out", str(tmp / "bench"))
        check(r.returncode == 0, "bench exits 0")
        rows = list(csv.DictReader((tmp / "bench" / "bench.csv").read_text().splitlines()))
        check([int(x["n_agents"]) for x in rows] == [2, 3, 4], "bench table has 3 rows")
        check(all(0.0 < float(x["mean_ms"]) < float("inf") for x in rows),
              "bench mean_ms positive and finite")
        check("n_agents,mean_ms" in r.stdout, "bench prints the table")

        r = run(cli, "bench", "--agents", "5..3")
        check(r.returncode == 1, "reversed agent range exits 1")
        r = run(cli, "bench", "--agents", "1..3")
        check(r.returncode == 1, "agent range below 2 exits 1")
        r = run(cli, "frobnicate")
        check(r.returncode == 1, "unknown subcommand exits 1")

        blocker = tmp / "blocker"
        blocker.write_text("")
        r = run(cli, "run", "--scenario", "head_on_four", "--out", str(blocker / "x"))
        check(r.returncode == 2, "unwritable output directory exits 2")

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1], sys.argv[2]))
