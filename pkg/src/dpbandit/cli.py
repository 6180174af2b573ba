"""Command-line front end: ``simulate``, ``account``, and ``audit``.

Exit codes: 0 success, 1 I/O failure, 2 invalid flags or inputs, 3 the
empirical privacy lower bound exceeded the analytical budget.  All numeric
output uses 17 significant digits; re-running a subcommand with identical
flags reproduces its output files byte for byte.  Files are only written
under the ``--out`` directory.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import accountant, audit, harness
from ._serialize import format_float, write_csv, write_json
from .bandit import AgentKind, AgentSpec, BanditInstance
from .errors import ConfigurationError, DomainError, EstimationError

_CONFIG_KEYS = {
    "simulate": {"arms", "horizon", "runs", "agent", "epsilon", "seed", "out"},
    "account": {"horizon", "trajectory", "delta_step", "slack", "out"},
    "audit": {
        "tape",
        "diff_round",
        "diff_arm",
        "alt_reward",
        "trials",
        "agent",
        "epsilon",
        "seed",
        "out",
        "delta",
    },
}


def _fail(message: str) -> int:
    print(f"dpbandit: error: {message}", file=sys.stderr)
    return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpbandit",
        description="Gaussian-posterior bandit simulation, privacy accounting, and auditing.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run seeded regret experiments")
    sim.add_argument("--config", help="JSON file providing defaults for the flags below")
    sim.add_argument("--arms", help="comma-separated arm means in [0,1]")
    sim.add_argument("--horizon", type=int, help="rounds per run")
    sim.add_argument("--runs", type=int, help="number of Monte Carlo runs")
    sim.add_argument("--agent", choices=["ts", "ts-dp", "ucb1"], help="agent to simulate")
    sim.add_argument("--epsilon", type=float, help="privacy target (ts-dp only)")
    sim.add_argument("--seed", type=int, help="base seed; run r uses (seed, r)")
    sim.add_argument("--out", help="output directory for runs.csv and summary.json")

    acct = sub.add_parser("account", help="compose a privacy budget")
    acct.add_argument("--config", help="JSON file providing defaults for the flags below")
    acct.add_argument("--horizon", type=int, help="number of rounds T (>= 2)")
    acct.add_argument("--trajectory", help="CSV of per-release pull counts (default 0..T-1)")
    acct.add_argument("--delta-step", type=float, help="per-release delta (default T^-5/2)")
    acct.add_argument("--slack", type=float, help="composition slack (default T^-4/2)")
    acct.add_argument("--out", help="output directory for account.json (default .)")

    aud = sub.add_parser("audit", help="estimate epsilon empirically on neighbor tapes")
    aud.add_argument("--config", help="JSON file providing defaults for the flags below")
    aud.add_argument("--tape", help="reward tape CSV with header t,arm0,arm1,...")
    aud.add_argument("--diff-round", type=int, help="round of the edited entry")
    aud.add_argument("--diff-arm", type=int, help="arm of the edited entry")
    aud.add_argument("--alt-reward", type=float, help="replacement reward in [0,1]")
    aud.add_argument("--trials", type=int, help="trials per tape")
    aud.add_argument("--agent", choices=["ts", "ts-dp"], help="agent under audit")
    aud.add_argument("--epsilon", type=float, help="privacy target (ts-dp only)")
    aud.add_argument("--seed", type=int, help="base seed for the trial streams")
    aud.add_argument("--delta", type=float, help="estimator delta slack (default T^-4)")
    aud.add_argument("--out", help="output directory for audit.json")
    return parser


def _apply_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the JSON config file; unknown keys are rejected."""
    if not args.config:
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        loaded = json.load(fh)
    if not isinstance(loaded, dict):
        raise ConfigurationError("config file must contain a JSON object")
    allowed = _CONFIG_KEYS[args.command]
    unknown = sorted(set(loaded) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in loaded.items():
        if key == "arms" and isinstance(value, list):
            value = ",".join(repr(float(v)) for v in value)
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _require(args: argparse.Namespace, names: list[str]) -> None:
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        flags = ", ".join("--" + n.replace("_", "-") for n in missing)
        raise ConfigurationError(f"missing required flags: {flags}")


def _parse_arms(text) -> tuple[float, ...]:
    try:
        means = tuple(float(part) for part in str(text).split(",") if part.strip() != "")
    except ValueError:
        raise ConfigurationError(f"could not parse arm means from {text!r}") from None
    if not means:
        raise ConfigurationError("at least one arm mean is required")
    return means


def _build_agent(name: str, epsilon, horizon: int) -> AgentSpec:
    if name == "ts-dp":
        if epsilon is None:
            raise ConfigurationError("--epsilon is required for the ts-dp agent")
        return AgentSpec.privacy(float(epsilon), horizon)
    if epsilon is not None:
        raise ConfigurationError("--epsilon only applies to the ts-dp agent")
    return AgentSpec.standard() if name == "ts" else AgentSpec.ucb1()


def _out_dir(path_text: str) -> Path:
    out = Path(path_text)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_simulate(args: argparse.Namespace) -> int:
    _require(args, ["arms", "horizon", "runs", "agent", "seed", "out"])
    env = BanditInstance(_parse_arms(args.arms))
    agent = _build_agent(args.agent, args.epsilon, args.horizon)
    config = harness.ExperimentConfig(
        env=env, agent=agent, horizon=int(args.horizon),
        runs=int(args.runs), base_seed=int(args.seed),
    )
    if agent.kind is AgentKind.TS_PRIVACY:
        baseline = math.log(config.horizon) ** 2
        if agent.epsilon_target > baseline:
            print(
                f"dpbandit: warning: epsilon {agent.epsilon_target} exceeds (ln T)^2 "
                f"= {baseline:.6g}; the sampling variance is below the standard "
                "agent's and the privacy target is weaker than the default guarantee",
                file=sys.stderr,
            )

    result = harness.run_many(config)

    out = _out_dir(args.out)
    rows = []
    for rec in result.records:
        for t in range(config.horizon):
            rows.append(
                [
                    str(rec.run_id),
                    str(t),
                    str(int(rec.actions[t])),
                    format_float(rec.rewards[t]),
                    format_float(rec.cum_regret[t]),
                ]
            )
    write_csv(out / "runs.csv", ["run_id", "t", "action", "reward", "cum_regret"], rows)

    summary = {
        "mean_final_regret": result.summary.mean_final_regret,
        "std_final_regret": result.summary.std_final_regret,
        "ci95_halfwidth": result.summary.ci95_halfwidth,
        "per_arm_pulls_mean": result.summary.per_arm_pulls_mean,
    }
    if agent.kind is AgentKind.TS_PRIVACY:
        if env.n_arms >= 2:
            summary["regret_bound_privacy"] = harness.regret_bound_privacy(
                config.horizon, env.n_arms, agent.epsilon_target
            )
        else:
            summary["regret_bound_privacy"] = None  # bound needs ln K > 0
    write_json(out / "summary.json", summary)
    return 0


def _read_count_trajectory(path: str) -> list[int]:
    counts: list[int] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row_index, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            cell = row[0].strip()
            if row_index == 0 and not cell.lstrip("-").isdigit():
                continue  # optional header row
            try:
                value = int(cell)
            except ValueError:
                raise ConfigurationError(f"trajectory row {row_index}: not an integer: {cell!r}") from None
            if value < 0:
                raise ConfigurationError(f"trajectory row {row_index}: negative count {value}")
            counts.append(value)
    if not counts:
        raise ConfigurationError("trajectory file contains no counts")
    return counts


def _cmd_account(args: argparse.Namespace) -> int:
    _require(args, ["horizon"])
    horizon = int(args.horizon)
    if horizon < 2:
        raise ConfigurationError("--horizon must be at least 2")
    delta_step = (
        accountant.default_delta_step(horizon)
        if args.delta_step is None
        else float(args.delta_step)
    )
    slack = accountant.default_slack(horizon) if args.slack is None else float(args.slack)
    if not 0.0 < delta_step < 0.5:
        raise ConfigurationError("--delta-step must lie in (0, 1/2)")
    if not 0.0 <= slack < 1.0:
        raise ConfigurationError("--slack must lie in [0, 1)")
    if args.trajectory is not None:
        counts = _read_count_trajectory(args.trajectory)
    else:
        counts = accountant.default_count_trajectory(horizon)

    budget = accountant.account_run(counts, delta_step, slack)
    nominal = accountant.asymptotic_budget(horizon)
    per_step = [
        {
            "pulls": k,
            "epsilon": accountant.eps_step_closed_form(k, delta_step),
            "delta": delta_step,
        }
        for k in counts
    ]
    report = {
        "T": horizon,
        "eps_composed": budget.epsilon,
        "delta_total": budget.delta,
        "branch": budget.branch.value,
        "eps_theorem1": nominal.epsilon,
        "delta_theorem1": nominal.delta,
        "per_step": per_step,
    }
    out = _out_dir(args.out if args.out is not None else ".")
    write_json(out / "account.json", report)
    return 0


def read_tape_csv(path) -> audit.RewardTape:
    """Parse a reward tape with header ``t,arm0,arm1,...``."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigurationError("tape file is empty") from None
        if len(header) < 2 or header[0] != "t":
            raise ConfigurationError("tape header must be t,arm0,arm1,...")
        expected = [f"arm{i}" for i in range(len(header) - 1)]
        if header[1:] != expected:
            raise ConfigurationError("tape header must be t,arm0,arm1,...")
        rows = []
        for t_expected, row in enumerate(reader):
            if not row:
                continue
            if len(row) != len(header):
                raise ConfigurationError(f"tape row {t_expected}: wrong cell count")
            try:
                t_value = int(row[0])
                values = [float(cell) for cell in row[1:]]
            except ValueError:
                raise ConfigurationError(f"tape row {t_expected}: unparsable cells") from None
            if t_value != t_expected:
                raise ConfigurationError(
                    f"tape rows must be t = 0,1,...; got {t_value} at position {t_expected}"
                )
            rows.append(values)
    if not rows:
        raise ConfigurationError("tape file has no reward rows")
    return audit.RewardTape(np.array(rows, dtype=np.float64))


def write_tape_csv(path, tape: audit.RewardTape) -> None:
    header = ["t"] + [f"arm{i}" for i in range(tape.n_arms)]
    rows = [
        [str(t)] + [format_float(v) for v in tape.rewards[t]]
        for t in range(tape.horizon)
    ]
    write_csv(path, header, rows)


def _cmd_audit(args: argparse.Namespace) -> int:
    _require(
        args,
        ["tape", "diff_round", "diff_arm", "alt_reward", "trials", "agent", "seed", "out"],
    )
    tape = read_tape_csv(args.tape)
    horizon = tape.horizon
    if int(args.trials) < 1:
        raise ConfigurationError("--trials must be at least 1")
    audit.outcome_space_size(horizon, tape.n_arms)
    if horizon < 2:
        raise ConfigurationError("audit requires a tape with at least 2 rounds")
    pair = audit.NeighborPair(
        base=tape,
        round=int(args.diff_round),
        arm=int(args.diff_arm),
        alt_reward=float(args.alt_reward),
    )
    agent = _build_agent(args.agent, args.epsilon, horizon)
    budget = accountant.account_run(
        audit.implied_count_trajectory(pair),
        accountant.default_delta_step(horizon),
        accountant.default_slack(horizon),
    )
    delta = float(args.delta) if args.delta is not None else float(horizon) ** -4
    report = audit.audit_algorithm(
        agent, pair, int(args.trials), int(args.seed), budget, delta
    )

    out = _out_dir(args.out)
    write_json(
        out / "audit.json",
        {
            "eps_hat": report.eps_hat,
            "ci_upper": report.ci_upper,
            "eps_analytical": report.eps_analytical,
            "pass": report.passed,
            "low_power": report.low_power,
            "delta": report.delta,
        },
    )
    return 0 if report.passed else 3


_COMMANDS = {"simulate": _cmd_simulate, "account": _cmd_account, "audit": _cmd_audit}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        _apply_config(args)
        return _COMMANDS[args.command](args)
    except (ConfigurationError, DomainError, EstimationError, json.JSONDecodeError) as exc:
        return _fail(str(exc))
    except FileNotFoundError as exc:
        return _fail(f"file not found: {exc.filename}")
    except OSError as exc:
        print(f"dpbandit: I/O error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
