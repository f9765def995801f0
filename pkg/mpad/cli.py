from __future__ import annotations

import contextlib
import logging
from collections.abc import Iterator
from pathlib import Path

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from . import analytics, attack, bench, fleet, scenario
from .config import get_settings
from .core import decrypt, encrypt, generate_matrix, generate_pairwise_key
from .errors import MpadError
from .model import MatrixSpec, Message, normalize_pair
from .report import fmt, param_columns, render_csv, render_estimates_csv, render_sweep_csv
from .rng import RandomSource
from .wire import (
    decode_frame,
    decode_key,
    decode_matrix,
    encode_frame,
    encode_key,
    encode_matrix,
    read_record,
    write_record,
)

app = typer.Typer(
    add_completion=False, help="Shared-matrix one-time pad: keys, ciphertexts, analysis."
)
attack_app = typer.Typer(add_completion=False, help="Monte-Carlo estimators and exact oracles.")
bench_app = typer.Typer(add_completion=False, help="Avalanche and runtime benchmarks.")
app.add_typer(attack_app, name="attack")
app.add_typer(bench_app, name="bench")

console = Console()
err_console = Console(stderr=True)

HARD_FAIL_EXIT = 3

# Reference deployment.
REFERENCE_N = 2**33
REFERENCE_K = 46
REFERENCE_M = 2**10
REFERENCE_DEVICES = 256
REFERENCE_ETA_MAX = 2**20
REFERENCE_LAMBDA = 128


@contextlib.contextmanager
def _guard() -> Iterator[None]:
    try:
        yield
    except MpadError as e:
        err_console.print(f"[red]error:[/red] {e}")
        raise typer.Exit(code=1) from e


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr"),
) -> None:
    with _guard():
        level = "DEBUG" if verbose else get_settings().log_level
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _rng(seed: int | None) -> RandomSource:
    return RandomSource.os_entropy() if seed is None else RandomSource.seeded(seed)


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        typer.echo(text, nl=False)
        return
    write_record(out, text.encode())
    console.print(f"[green]Wrote[/green] {out}")


def _ints(text: str) -> list[int]:
    try:
        return [int(t, 0) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"expected comma-separated integers, got {text!r}.") from e


SEED = typer.Option(None, "--seed", help="Deterministic RandomSource seed")
OUT = typer.Option(None, "--out", help="Write CSV here instead of stdout")


@app.command()
def keygen(
    out: Path = typer.Option(Path("keys"), "--out", help="Directory for matrix and key files"),
    n: int = typer.Option(2**20, "--n", min=2),
    k: int = typer.Option(8, "--k", min=1),
    q: int = typer.Option(0, "--q", min=0),
    l: int = typer.Option(1, "--l", min=0),
    slot: int = typer.Option(0, "--slot", min=0),
    seed: int | None = SEED,
) -> None:
    """Generate a shared matrix and one pairwise key."""
    with _guard():
        rng = _rng(seed)
        spec = MatrixSpec(k=k, n=n)
        matrix = generate_matrix(spec, rng)
        key = generate_pairwise_key(spec, normalize_pair(q, l), slot, rng)
        matrix_path = write_record(out / "matrix.mpad", encode_matrix(matrix))
        name = f"key_{key.pair[0]}_{key.pair[1]}_{slot}.mpad"
        key_path = write_record(out / name, encode_key(key))
    console.print(f"[green]Wrote[/green] {matrix_path}")
    console.print(f"[green]Wrote[/green] {key_path}")
    console.print(
        f"key: {key.k} components, {key.info_bits:.6g} information bits, "
        f"{key.storage_bits} stored bits"
    )


@app.command("encrypt")
def encrypt_cmd(
    source: Path = typer.Argument(..., help="Plaintext file"),
    matrix_path: Path = typer.Option(..., "--matrix"),
    key_path: Path = typer.Option(..., "--key"),
    out: Path = typer.Option(..., "--out", help="Ciphertext frame file"),
    eta: int = typer.Option(1, "--eta", min=1),
    eta_max: int | None = typer.Option(None, "--eta-max", min=1),
) -> None:
    """Encrypt a file into one ciphertext frame (m = 8 * file size)."""
    with _guard():
        matrix = decode_matrix(read_record(matrix_path))
        key = decode_key(read_record(key_path))
        message = Message.from_bytes(read_record(source))
        ct = encrypt(matrix, key, message, eta, eta_max=eta_max)
        write_record(out, encode_frame(ct))
    console.print(f"[green]Encrypted[/green] {message.m} bits -> {out}")


@app.command("decrypt")
def decrypt_cmd(
    frame_path: Path = typer.Argument(..., help="Ciphertext frame file"),
    matrix_path: Path = typer.Option(..., "--matrix"),
    key_path: Path = typer.Option(..., "--key"),
    out: Path = typer.Option(..., "--out", help="Recovered plaintext file"),
) -> None:
    """Decrypt one ciphertext frame."""
    with _guard():
        matrix = decode_matrix(read_record(matrix_path))
        key = decode_key(read_record(key_path))
        message = decrypt(matrix, key, decode_frame(read_record(frame_path)))
        write_record(out, message.to_bytes())
    console.print(f"[green]Decrypted[/green] {message.m} bits -> {out}")


ANALYZE_HEADER = (
    *param_columns(analytics.SWEEP_FIELDS),
    "log2_bound",
    "log2_bound_single",
    "vacuous",
    "device_gain",
    "system_gain",
    "pair_capacity_bytes",
    "exchangeable_bytes",
    "xors_per_bit",
    "expected_trials_log2",
)


@app.command()
def analyze(
    n: int = typer.Option(REFERENCE_N, "--n"),
    k: int = typer.Option(REFERENCE_K, "--k"),
    m: int = typer.Option(REFERENCE_M, "--m"),
    devices: int = typer.Option(REFERENCE_DEVICES, "--devices"),
    eta_max: int = typer.Option(REFERENCE_ETA_MAX, "--eta-max"),
    lam: int = typer.Option(REFERENCE_LAMBDA, "--lambda"),
    out: Path | None = OUT,
) -> None:
    """Advantage bound, secrecy gains and capacity for one parameter set."""
    with _guard():
        params = analytics.SystemParams(n=n, k=k, m=m, devices=devices, eta_max=eta_max, lam=lam)
        bound = analytics.advantage_bound(params)
        single = analytics.advantage_bound(params, multi=False)
        budget = analytics.device_budget(params, 0)
        row = (
            n,
            k,
            m,
            devices,
            eta_max,
            lam,
            bound.log2_bound,
            single.log2_bound,
            bound.vacuous,
            analytics.device_secrecy_gain(params, 0).gain,
            analytics.system_secrecy_gain(params).gain,
            analytics.pair_capacity_bits(params) // 8,
            budget.exchangeable_bytes,
            budget.xors_per_encrypted_bit,
            analytics.key_recovery_cost(n, k, m).expected_trials_log2,
        )
    if bound.vacuous:
        err_console.print("[yellow]advantage bound is vacuous (>= 1)[/yellow]")
    _emit(render_csv(ANALYZE_HEADER, [row]), out)


@app.command()
def sweep(
    metric: str = typer.Option("advantage_log2", "--metric", help=", ".join(analytics.METRICS)),
    n: str = typer.Option(str(REFERENCE_N), "--n", help="Comma-separated values"),
    k: str = typer.Option(str(REFERENCE_K), "--k"),
    m: str = typer.Option(str(REFERENCE_M), "--m"),
    devices: str = typer.Option(str(REFERENCE_DEVICES), "--devices"),
    eta_max: str = typer.Option(str(REFERENCE_ETA_MAX), "--eta-max"),
    lam: str = typer.Option(str(REFERENCE_LAMBDA), "--lambda"),
    out: Path | None = OUT,
) -> None:
    """Evaluate one metric over the cartesian product of parameter lists."""
    grid = {
        "n": _ints(n),
        "k": _ints(k),
        "m": _ints(m),
        "devices": _ints(devices),
        "eta_max": _ints(eta_max),
        "lam": _ints(lam),
    }
    with _guard():
        rows = analytics.sweep(grid, metric)
    _emit(render_sweep_csv(rows), out)


@app.command()
def simulate(
    script: Path = typer.Argument(..., help="Scenario file"),
    out: Path | None = OUT,
) -> None:
    """Run a mission scenario; eavesdrop-dump paths are relative to the scenario file."""
    with _guard():
        commands = scenario.load_scenario(script)
        result = scenario.run_scenario(commands, base_dir=script.parent)
        duplicates = fleet.duplicate_windows(result.fleet.transcript)
        leaked = fleet.hygiene_violations(result.fleet)

    table = Table(title=f"Scenario {script.name}")
    table.add_column("Line", justify="right")
    table.add_column("Command", style="bold")
    table.add_column("Result")
    table.add_column("Detail")
    for o in result.outcomes:
        status = "[green]ok[/green]" if o.ok else "[yellow]refused[/yellow]"
        table.add_row(str(o.line_no), o.verb, status, o.detail)
    err_console.print(table)
    err_console.print(
        f"{len(result.fleet.transcript)} frames, {len(duplicates)} duplicate windows, "
        f"{len(leaked)} hygiene flags"
    )
    rows = [(o.line_no, o.verb, o.ok, o.detail) for o in result.outcomes]
    _emit(render_csv(("line", "command", "ok", "detail"), rows), out)
    if duplicates or any(o.record is not None and not o.record.delivered for o in result.outcomes):
        raise typer.Exit(code=HARD_FAIL_EXIT)


def _finish_estimates(rows: list[tuple[object, ...]], out: Path | None) -> None:
    _emit(render_estimates_csv(rows), out)
    if any(r[-1] == "fail" for r in rows):
        err_console.print("[red]hard-fail verdict[/red]")
        raise typer.Exit(code=HARD_FAIL_EXIT)


@attack_app.command("collision")
def attack_collision(
    n: int = typer.Option(8, "--n", min=1),
    k: int = typer.Option(1, "--k", min=1),
    m: int = typer.Option(2, "--m", min=1),
    eta_max: int = typer.Option(1, "--eta-max", min=1),
    multi: bool = typer.Option(False, "--multi", help="Use the eta_max * m window"),
    trials: int = typer.Option(100_000, "--trials"),
    workers: int | None = typer.Option(None, "--workers", min=1),
    seed: int | None = SEED,
    out: Path | None = OUT,
) -> None:
    """Window-collision probability: Monte-Carlo against the closed form."""
    with _guard():
        params = attack.LabParams(n=n, k=k, m=m, eta_max=eta_max)
        est = attack.collision_probability_mc(
            params, trials, _rng(seed), multi=multi, workers=workers
        )
    _finish_estimates([est.csv_row()], out)


@attack_app.command("otp-failure")
def attack_otp_failure(
    n: int = typer.Option(16, "--n", min=1),
    k: int = typer.Option(1, "--k", min=1),
    m: int = typer.Option(2, "--m", min=1),
    eta_max: int = typer.Option(1, "--eta-max", min=1),
    devices: int = typer.Option(3, "--devices", min=2),
    trials: int = typer.Option(100_000, "--trials"),
    workers: int | None = typer.Option(None, "--workers", min=1),
    seed: int | None = SEED,
    out: Path | None = OUT,
) -> None:
    """One-time-pad failure of pair (0, 1) against the union bound."""
    with _guard():
        params = attack.LabParams(n=n, k=k, m=m, eta_max=eta_max, devices=devices)
        est = attack.one_time_pad_failure_mc(params, trials, _rng(seed), workers=workers)
    err_console.print(
        f"window={est.window_hits} coincidence={est.coincidence_hits} "
        f"cross-window={est.cross_window_hits}"
    )
    _finish_estimates([est.csv_row()], out)


@attack_app.command("frequency")
def attack_frequency(
    k: str = typer.Option("1,8,46", "--k", help="Comma-separated row counts"),
    n: int = typer.Option(2**16, "--n", min=1, help="Matrix columns"),
    bias: float = typer.Option(0.5, "--bias", min=0.0, max=1.0),
    bits: int = typer.Option(1_000_000, "--bits"),
    seed: int | None = SEED,
    out: Path | None = OUT,
) -> None:
    """Keystream bit frequency against (1 - (1 - 2 bias)^k) / 2."""
    rng = _rng(seed)
    with _guard():
        reports = [
            attack.keystream_frequency_test(MatrixSpec(k=kk, n=n, bias=bias), bits, rng)
            for kk in _ints(k)
        ]
    _finish_estimates([r.csv_row() for r in reports], out)


@attack_app.command("brute-force")
def attack_brute_force(
    n: int = typer.Option(16, "--n", min=2),
    k: int = typer.Option(2, "--k", min=1),
    m: int = typer.Option(24, "--m", min=1),
    instances: int = typer.Option(1000, "--instances", min=1),
    budget: int | None = typer.Option(None, "--search-budget", min=1),
    seed: int | None = SEED,
) -> None:
    """Exhaustive key recovery from one known plaintext per instance."""
    with _guard():
        params = attack.LabParams(n=n, k=k, m=m)
        summary = attack.brute_force_campaign(params, instances, _rng(seed), budget)

    table = Table(title=f"Brute force {params.label}")
    table.add_column("Instances", justify="right")
    table.add_column("Recovered", justify="right")
    table.add_column("Multi-candidate", justify="right")
    table.add_column("Mean trials", justify="right", style="cyan")
    table.add_column("Expected", justify="right")
    table.add_row(
        str(summary.instances),
        str(summary.recovered),
        str(summary.multi_candidate),
        fmt(summary.mean_trials),
        fmt(summary.expected_trials),
    )
    console.print(table)
    if summary.recovered != summary.instances:
        raise typer.Exit(code=HARD_FAIL_EXIT)


@attack_app.command("game")
def attack_game(
    n: int = typer.Option(8, "--n", min=2),
    k: int = typer.Option(1, "--k", min=1),
    m: int = typer.Option(2, "--m", min=1),
    devices: int = typer.Option(3, "--devices", min=2),
    layouts: int = typer.Option(20, "--layouts", min=1),
    seed: int | None = SEED,
    out: Path | None = OUT,
) -> None:
    """Exact Bayes-optimal advantage in the two-message game for random message layouts."""
    rng = _rng(seed)
    rows = []
    with _guard():
        params = attack.LabParams(n=n, k=k, m=m, devices=devices)
        for i in range(layouts):
            challenge, others = attack.random_layout(params, rng)
            result = attack.exact_bayes_advantage(params, challenge, others)
            rows.append(
                (
                    i,
                    result.advantage_exact,
                    result.overlap_probability,
                    result.bound,
                    result.dominated,
                )
            )
    header = ("layout", "advantage", "overlap_probability", "bound", "dominated")
    _emit(render_csv(header, rows), out)
    if not all(r[-1] for r in rows):
        raise typer.Exit(code=HARD_FAIL_EXIT)


@bench_app.command("avalanche")
def bench_avalanche(
    n: int = typer.Option(2**22, "--n"),
    k: int = typer.Option(8, "--k"),
    m: int = typer.Option(10**6, "--m"),
    trials: int = typer.Option(10, "--trials", min=1),
    zero_fractions: str = typer.Option("0.01,0.5,0.99", "--zero-fractions"),
    seed: int | None = SEED,
    out: Path | None = OUT,
) -> None:
    """Flip plaintext bit 1 and measure ciphertext change, same and fresh window."""
    try:
        fractions = [float(t) for t in zero_fractions.split(",") if t.strip()]
    except ValueError as e:
        raise typer.BadParameter(f"bad zero fractions {zero_fractions!r}.") from e
    with _guard():
        params = attack.LabParams(n=n, k=k, m=m, eta_max=2)
        report = bench.avalanche_bench(params, fractions, trials, _rng(seed))
    _emit(render_csv(bench.AVALANCHE_HEADER, report.csv_rows()), out)


@bench_app.command("runtime")
def bench_runtime(
    sizes: str = typer.Option(
        ",".join(map(str, bench.RUNTIME_SIZES)), "--m", help="Message sizes in bits"
    ),
    ks: str = typer.Option(
        ",".join(map(str, bench.RUNTIME_KS)), "--k", help="Comma-separated row counts"
    ),
    repetitions: int = typer.Option(21, "--repetitions", min=1),
    seed: int | None = SEED,
    out: Path | None = OUT,
) -> None:
    """Median encrypt/decrypt wall-clock time over a (m, k) grid."""
    grid = [(m, k) for m in _ints(sizes) for k in _ints(ks)]
    with _guard():
        report = bench.runtime_bench(grid, repetitions, _rng(seed))
    err_console.print(
        f"time ~ {report.slope:.3g} * m * k + {report.intercept:.3g} s "
        f"(R^2 = {report.r_squared:.4f})"
    )
    _emit(render_csv(bench.RUNTIME_HEADER, report.csv_rows()), out)


if __name__ == "__main__":
    app()
