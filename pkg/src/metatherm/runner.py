"""Command implementations behind the CLI.

Each command turns a validated RunConfig into an ExperimentRecord: metrics,
data tables (one CSV each), and artifact files (checkpoints, reports), all
written atomically under a run directory named by the config hash, so an
identical config lands in the same place and reproduces the same bytes.
"""

from __future__ import annotations

import os

import numpy as np

from .circuits import externals_to_trainables
from .config import RunConfig, config_hash, materialize_grid, serialize_config
from .errors import ValidationError
from .hamiltonians import commuting_blocks, expectation
from .linalg import von_neumann_entropy
from .oracle import DEFAULT_T_GRID, exact_gibbs, phase_scan
from .qbm import QbmConfig, train_qbm
from .records import (
    ExperimentRecord,
    Table,
    emit_plotdata,
    save_record,
    write_atomic,
    write_json,
)
from .seeding import stream
from .trainers import (
    EvalTable,
    MetaTrainConfig,
    NnTrainConfig,
    evaluate_on_grid,
    load_checkpoint,
    save_checkpoint,
    train_meta_vqt,
    train_nn_meta_vqt,
    train_vqt_single,
)


def _h_header(param_dim: int) -> list[str]:
    return ["h"] if param_dim == 1 else [f"h{i}" for i in range(param_dim)]


def _eval_to_table(tab: EvalTable) -> Table:
    header = _h_header(tab.h.shape[1]) + [
        "g_var", "g_exact", "fidelity", "trace_distance", "rel_error",
    ]
    rows = [
        [*(float(v) for v in tab.h[i]), float(tab.g_var[i]), float(tab.g_exact[i]),
         float(tab.fidelity[i]), float(tab.trace_distance[i]), float(tab.rel_error[i])]
        for i in range(tab.h.shape[0])
    ]
    return Table(header, rows)


def _eval_metrics(tab: EvalTable) -> dict:
    ok = np.isfinite(tab.rel_error)
    return {
        "mean_fidelity": float(tab.fidelity.mean()),
        "min_fidelity": float(tab.fidelity.min()),
        "mean_trace_distance": float(tab.trace_distance.mean()),
        "max_rel_error": float(tab.rel_error[ok].max()) if ok.any() else None,
        "n_test_points": int(tab.h.shape[0]),
        "n_skipped_rel_error": len(tab.skipped),
    }


def _loss_table(losses: np.ndarray) -> Table:
    return Table(["epoch", "loss"], [[e, float(l)] for e, l in enumerate(losses)])


def _train_common(cfg: RunConfig, report, run_dir: str, chash: str):
    report.checkpoint.config_hash = chash
    save_checkpoint(os.path.join(run_dir, "checkpoint.json"), report.checkpoint)
    write_json(os.path.join(run_dir, "report.json"), report.to_dict())
    family = report.checkpoint.family
    tables = {"loss_history": _loss_table(report.loss_history)}
    metrics = {
        "final_loss": float(report.loss_history[-1]) if report.loss_history.size else None,
        "wall_time_s": report.wall_time_s,
        "n_trainable": report.checkpoint.spec.n_trainable,
        "n_external": report.checkpoint.spec.n_external,
    }
    if cfg.grid_test is not None:
        h_test = materialize_grid(cfg.grid_test, family.param_dim, cfg.seed, "test")
        tab = evaluate_on_grid(report.checkpoint, family, h_test, cfg.beta)
        tables["eval_grid"] = _eval_to_table(tab)
        metrics.update(_eval_metrics(tab))
    artifacts = {"checkpoint": "checkpoint.json", "report": "report.json"}
    return metrics, tables, artifacts


def _run_train_meta(cfg: RunConfig, run_dir: str, chash: str):
    family = cfg.family()
    h_train = materialize_grid(cfg.grid_train, family.param_dim, cfg.seed, "train")
    report = train_meta_vqt(MetaTrainConfig(
        family=family, h_train=h_train, beta=cfg.beta, epochs=cfg.epochs,
        lr=cfg.lr, seed=cfg.seed, l_enc=cfg.l_enc, l_hva=cfg.l_hva,
        grad_step=cfg.grad_step,
    ))
    return _train_common(cfg, report, run_dir, chash)


def _run_train_nn_meta(cfg: RunConfig, run_dir: str, chash: str):
    family = cfg.family()
    h_train = materialize_grid(cfg.grid_train, family.param_dim, cfg.seed, "train")
    report = train_nn_meta_vqt(NnTrainConfig(
        family=family, h_train=h_train, beta=cfg.beta, epochs=cfg.epochs,
        lr=cfg.lr, seed=cfg.seed, l_su2=cfg.l_su2, l_hva=cfg.l_hva,
        hidden=cfg.hidden, grad_step=cfg.grad_step,
    ))
    return _train_common(cfg, report, run_dir, chash)


def _run_eval(cfg: RunConfig, run_dir: str, chash: str):
    ck = load_checkpoint(cfg.checkpoint)
    beta = ck.beta if cfg.beta is None else cfg.beta
    h_test = materialize_grid(
        cfg.grid_test, ck.family.param_dim, cfg.seed, "test"
    )
    tab = evaluate_on_grid(ck, ck.family, h_test, beta)
    return _eval_metrics(tab), {"eval_grid": _eval_to_table(tab)}, {}


def _run_warmstart(cfg: RunConfig, run_dir: str, chash: str):
    ck = load_checkpoint(cfg.checkpoint)
    family = ck.family
    h_points = materialize_grid(cfg.warm_h, family.param_dim, cfg.seed, "warm")
    random_spec = (
        externals_to_trainables(ck.spec) if ck.kind == "nn-meta" else ck.spec
    )
    meta_init = ck.net if ck.kind == "nn-meta" else ck.trainables
    header = _h_header(family.param_dim) + [
        "seed", "init", "final_fidelity", "final_free_energy",
    ]
    rows = []
    fid = {"meta": [], "random": []}
    for i, h in enumerate(h_points):
        for s in range(cfg.warm_seeds):
            theta0 = stream(cfg.seed, "warm-random", str(i), str(s)).uniform(
                -np.pi, np.pi, random_spec.n_trainable
            )
            runs = (
                ("meta", ck.spec, meta_init),
                ("random", random_spec, theta0),
            )
            for name, spec, init in runs:
                rep = train_vqt_single(
                    family, h, ck.beta, spec, init,
                    cfg.warm_epochs, cfg.warm_lr, cfg.grad_step,
                )
                fid[name].append(rep.final_fidelity)
                rows.append([
                    *(float(v) for v in h), s, name,
                    rep.final_fidelity, float(rep.per_h_free_energy[0]),
                ])
    metrics = {
        "mean_fidelity_meta": float(np.mean(fid["meta"])),
        "mean_fidelity_random": float(np.mean(fid["random"])),
        "advantage": float(np.mean(fid["meta"]) - np.mean(fid["random"])),
        "n_points": h_points.shape[0],
        "n_seeds": cfg.warm_seeds,
        "epochs": cfg.warm_epochs,
    }
    return metrics, {"warmstart": Table(header, rows)}, {}


def _run_qbm(cfg: RunConfig, run_dir: str, chash: str):
    ck = load_checkpoint(cfg.checkpoint)
    report = train_qbm(QbmConfig(
        p_target=np.asarray(cfg.qbm_target, dtype=float), preparer=ck,
        beta=cfg.beta, epochs=cfg.epochs, lr=cfg.lr,
        grad_step=cfg.grad_step, seed=cfg.seed,
    ))
    write_json(os.path.join(run_dir, "report.json"), report.to_dict())
    table = Table(
        ["epoch", "kl", "trace_distance"],
        [[e, float(k), float(t)] for e, (k, t) in
         enumerate(zip(report.kl_history, report.trace_distance_history))],
    )
    metrics = {
        "final_kl": float(report.kl_history[-1]) if report.kl_history.size else None,
        "mean_trace_distance": float(report.trace_distance_history.mean())
        if report.trace_distance_history.size else None,
        "invocations": report.invocations,
        "final_params": [float(v) for v in report.final_params],
        "final_p_model": None if report.final_p_model is None
        else [float(v) for v in report.final_p_model],
        "wall_time_s": report.wall_time_s,
    }
    return metrics, {"qbm_history": table}, {"report": "report.json"}


def _run_phase_scan(cfg: RunConfig, run_dir: str, chash: str):
    family = cfg.family()
    h_values = materialize_grid(cfg.grid_h, 1, cfg.seed, "h").ravel()
    T_grid = (
        DEFAULT_T_GRID if cfg.grid_t is None
        else materialize_grid(cfg.grid_t, 1, cfg.seed, "t").ravel()
    )
    rows, crossover = phase_scan(family, h_values, T_grid, cfg.scan_dh)
    tables = {
        "susceptibility": Table(["h", "t", "chi"], [list(r) for r in rows]),
        "crossover": Table(["h", "t_star"], [list(r) for r in crossover]),
    }
    metrics = {
        "n_h": int(h_values.size),
        "n_t": int(np.asarray(T_grid).size),
        "t_star_min": min(t for _, t in crossover),
        "t_star_max": max(t for _, t in crossover),
    }
    return metrics, tables, {}


def _run_oracle(cfg: RunConfig, run_dir: str, chash: str):
    family = cfg.family()
    points = materialize_grid(cfg.grid_h, family.param_dim, cfg.seed, "h")
    header = _h_header(family.param_dim) + ["g_exact", "energy", "entropy"]
    rows = []
    for h in points:
        hs = family.build(h)
        point = exact_gibbs(hs, cfg.beta)
        rows.append([
            *(float(v) for v in h),
            point.free_energy,
            expectation(hs, point.gibbs_state),
            von_neumann_entropy(point.gibbs_state),
        ])
    n_blocks, _ = commuting_blocks(family.build(points[0]))
    metrics = {
        "n_points": points.shape[0],
        "beta": cfg.beta,
        "n_terms": len(family.build(points[0]).terms),
        "commuting_blocks": n_blocks,
    }
    return metrics, {"oracle": Table(header, rows)}, {}


_RUNNERS = {
    "train-meta": _run_train_meta,
    "train-nn-meta": _run_train_nn_meta,
    "eval": _run_eval,
    "warmstart-vqt": _run_warmstart,
    "qbm": _run_qbm,
    "phase-scan": _run_phase_scan,
    "oracle": _run_oracle,
}


def run_dir_for(cfg: RunConfig) -> str:
    return os.path.join(cfg.out, f"{cfg.command}-{config_hash(cfg)[:12]}")


def run(cfg: RunConfig) -> ExperimentRecord:
    """Execute a validated config; write record, tables and artifacts; return the record."""
    if cfg.command not in _RUNNERS:
        raise ValidationError([f"unknown command {cfg.command!r}"])
    chash = config_hash(cfg)
    run_dir = run_dir_for(cfg)
    os.makedirs(run_dir, exist_ok=True)
    write_atomic(os.path.join(run_dir, "config.txt"), serialize_config(cfg))
    metrics, tables, artifacts = _RUNNERS[cfg.command](cfg, run_dir, chash)
    record = ExperimentRecord(
        command=cfg.command,
        config_text=serialize_config(cfg),
        config_hash=chash,
        metrics=metrics,
        tables=tables,
        artifacts=artifacts,
    )
    save_record(record, run_dir)
    emit_plotdata(record, run_dir)
    return record
