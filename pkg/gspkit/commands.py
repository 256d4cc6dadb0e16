#!/usr/bin/env python3
"""Subcommand handlers of the command line front end."""
import argparse
import time
from dataclasses import dataclass
from dataclasses import field
from pathlib import Path
from typing import Any
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from tinydb import TinyDB

from gspkit.fileio import filter_record
from gspkit.fileio import parse_floats
from gspkit.fileio import read_filter
from gspkit.fileio import read_graph
from gspkit.fileio import read_json
from gspkit.fileio import read_labels
from gspkit.fileio import read_psd
from gspkit.fileio import read_samples
from gspkit.fileio import read_signal
from gspkit.fileio import write_graph
from gspkit.fileio import write_json
from gspkit.fileio import write_matrix
from gspkit.fileio import write_table
from gspkit.filters import apply_filter
from gspkit.filters import chebyshev_apply
from gspkit.filters import chebyshev_fit
from gspkit.filters import ChebyshevExpansion
from gspkit.filters import evaluate_kernel
from gspkit.filters import filter_matrix
from gspkit.filters import gershgorin_interval
from gspkit.filters import GraphFilter
from gspkit.filters import Kernel
from gspkit.filters import KERNEL_FACTORIES
from gspkit.graphs import directed_cycle
from gspkit.graphs import Graph
from gspkit.graphs import Gso
from gspkit.graphs import make_gso
from gspkit.inverse import BandlimitedModel
from gspkit.inverse import identify_sources
from gspkit.inverse import interpolate_bandlimited
from gspkit.inverse import interpolate_regularized
from gspkit.inverse import sampling_quality
from gspkit.inverse import ssl_labels
from gspkit.spectral import decompose
from gspkit.spectral import gft
from gspkit.spectral import spectrum_record
from gspkit.spectral import total_variation
from gspkit.stochastic import periodogram
from gspkit.stochastic import PsdEstimate
from gspkit.stochastic import sample_covariance
from gspkit.stochastic import stationarity_score
from gspkit.stochastic import synthesize_stationary
from gspkit.stochastic import wiener_denoise
from gspkit.timevertex import fit_graph_var
from gspkit.timevertex import fit_structural_var
from gspkit.timevertex import joint_gft
from gspkit.timevertex import predict_var
from gspkit.timevertex import product_gso
from gspkit.timevertex import VarModel
from gspkit.tools import GspDataError
from gspkit.tools import GspUsageError
from gspkit.tools import system_logger
from gspkit.topology import correlation_graph
from gspkit.topology import learn_smooth_laplacian
from gspkit.topology import precision_graph
from gspkit.topology import spectral_template_adjacency
from gspkit.topology import threshold_sweep

METADATA_FILE = "metadata.json"

INPUT_KEYS = [
    "graph",
    "matrix",
    "time_graph",
    "signal",
    "signals",
    "samples",
    "labels",
    "truth",
    "psd",
    "filter",
    "model",
]

RUN_KEYS = ["command", "seed", "out_dir", "quiet"]

SWEEP_POINTS: int = 20


@dataclass
class RunConfig:

    command: str
    """Subcommand name."""
    inputs: dict[str, str] = field(default_factory=dict)
    """Input files by role (graph, signal, samples, ...)."""
    out_dir: Path = Path(".")
    """Directory receiving every output file."""
    parameters: dict[str, Any] = field(default_factory=dict)
    """Flat parameter map (alpha, beta, k, threshold, p, l, ...)."""
    seed: int = 0
    """Seed of every random draw, recorded in the metadata."""

    @classmethod
    def from_args(cls, argv: argparse.Namespace) -> "RunConfig":

        values = {k: v for k, v in vars(argv).items() if v is not None}
        if "command" not in values:
            raise GspUsageError("Run: no subcommand given.")

        return cls(
            command=values["command"],
            inputs={k: str(values[k]) for k in INPUT_KEYS if k in values},
            out_dir=Path(values.get("out_dir", ".")),
            parameters={
                k: v
                for k, v in values.items()
                if k not in INPUT_KEYS and k not in RUN_KEYS
            },
            seed=int(values.get("seed", 0)),
        )

    def validate(self) -> None:

        if self.command not in HANDLERS:
            raise GspUsageError(
                f"Run: unknown subcommand {self.command}. Should be one of {list(HANDLERS)}."
            )
        for role, path in self.inputs.items():
            if not Path(path).exists():
                raise GspDataError(f"Run: {role} file {path} does not exist.")

    def get(self, key: str, default: Any = None) -> Any:
        return self.parameters.get(key, default)

    def require(self, key: str) -> Any:
        if key in self.inputs:
            return self.inputs[key]
        if key in self.parameters:
            return self.parameters[key]
        raise GspUsageError(
            f"Run: {self.command} needs --{key.replace('_', '-')}."
        )

    def output(self, name: str) -> Path:
        return self.out_dir / name


def dispatch(cfg: RunConfig) -> dict[str, Any]:
    """Run one subcommand and store its metadata record beside the outputs."""

    from gspkit import __version__

    cfg.validate()
    cfg.out_dir.mkdir(parents=True, exist_ok=True)

    system_logger("GSPKIT", f"running {cfg.command}")
    start = time.perf_counter()
    results = HANDLERS[cfg.command](cfg)
    wall_time = time.perf_counter() - start

    record = {
        "command": cfg.command,
        "inputs": cfg.inputs,
        "parameters": cfg.parameters,
        "seed": cfg.seed,
        "version": __version__,
        "wall_time": wall_time,
        "results": results,
    }

    db = TinyDB(str(cfg.output(METADATA_FILE)), sort_keys=True, indent=2)
    db.truncate()
    db.insert(record)
    db.close()

    system_logger("GSPKIT", f"{cfg.command} finished in {wall_time:.3f} s")

    return record


def run_spectrum(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    d = decompose(s)
    _write_values(cfg.output("eigenvalues.csv"), d.eigenvalues)

    results: dict[str, Any] = {
        "n": d.n,
        "real": bool(d.is_real),
        "orthonormal": bool(d.orthonormal),
    }

    coefficients = None
    if "signal" in cfg.inputs:
        x = _single_signal(cfg, "signal")
        coefficients = gft(d, x)
        _write_values(cfg.output("gft.csv"), coefficients)
        if s.is_symmetric:
            results["total_variation"] = total_variation(s, x)

    write_json(cfg.output("spectrum.json"), spectrum_record(d, coefficients))

    return results


def run_filter(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    x = read_signal(cfg.require("signal"))

    given = [
        key
        for key in ["taps", "response", "denominator", "kernel", "filter"]
        if key in cfg.parameters or key in cfg.inputs
    ]
    if len(given) != 1:
        raise GspUsageError(
            "Run: filter needs exactly one of --taps, --response, --denominator, --kernel, --filter."
        )

    if given[0] == "taps":
        f = GraphFilter.from_taps(parse_floats(cfg.get("taps")))
        y = apply_filter(f, x, s=s)
    elif given[0] == "denominator":
        f = GraphFilter.from_rational(parse_floats(cfg.get("denominator")))
        y = apply_filter(f, x, s=s)
    elif given[0] == "response":
        d = decompose(s)
        f = GraphFilter.from_response(d, parse_floats(cfg.get("response")))
        y = apply_filter(f, x, d=d)
    elif given[0] == "kernel":
        kernel = _kernel(cfg)
        if "chebyshev" in cfg.parameters:
            interval = (
                tuple(parse_floats(cfg.get("interval")))
                if "interval" in cfg.parameters
                else gershgorin_interval(s)
            )
            f = chebyshev_fit(kernel, int(cfg.get("chebyshev")), interval)
            y = chebyshev_apply(s, f, x)
        else:
            d = decompose(s)
            f = GraphFilter.from_response(d, evaluate_kernel(kernel, d.eigenvalues))
            y = apply_filter(f, x, d=d)
    else:
        f = read_filter(cfg.inputs["filter"])
        if isinstance(f, ChebyshevExpansion):
            y = chebyshev_apply(s, f, x)
        elif f.form == "response":
            y = apply_filter(f, x, d=decompose(s))
        else:
            y = apply_filter(f, x, s=s)

    write_matrix(cfg.output("signal.csv"), np.real(y))
    write_json(cfg.output("filter.json"), filter_record(f))

    return {"form": "chebyshev" if isinstance(f, ChebyshevExpansion) else f.form}


def run_interpolate(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    m, x_m = read_samples(cfg.require("samples"), s.n)
    mode = cfg.get("mode", "bandlimited")

    results: dict[str, Any] = {"mode": mode, "samples": m.size}
    if mode == "bandlimited":
        b = BandlimitedModel(decomposition=decompose(s), bandwidth=int(cfg.require("k")))
        results["sigma_min"] = sampling_quality(b, m)
        x = interpolate_bandlimited(b, m, x_m)
    elif mode == "regularized":
        hfilt = GraphFilter.from_taps(parse_floats(cfg.require("taps")))
        x = interpolate_regularized(s, hfilt, float(cfg.require("alpha")), m, x_m)
    else:
        raise GspUsageError(f"Run: unknown interpolation mode {mode}.")

    x = np.real(x)
    write_matrix(cfg.output("signal.csv"), x)

    if "truth" in cfg.inputs:
        truth = _single_signal(cfg, "truth")
        if truth.shape != x.shape:
            raise GspDataError(
                f"Run: truth of shape {truth.shape} does not match the reconstruction {x.shape}."
            )
        scale = np.linalg.norm(truth)
        error = np.linalg.norm(x - truth)
        results["reconstruction_error"] = float(error / scale if scale > 0 else error)

    return results


def run_ssl(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    labeled, labels = read_labels(cfg.require("labels"), s.n)
    hfilt = (
        GraphFilter.from_taps(parse_floats(cfg.get("taps")))
        if "taps" in cfg.parameters
        else None
    )

    scores, classes = ssl_labels(s, float(cfg.require("alpha")), labeled, labels, hfilt)

    vertices = np.arange(s.n)
    write_table(cfg.output("scores.csv"), "vertex,score", [vertices, scores])
    write_table(cfg.output("classes.csv"), "vertex,class", [vertices, classes])

    return {
        "labeled": labeled.size,
        "positive": int(np.count_nonzero(classes > 0)),
    }


def run_sources(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    x = _single_signal(cfg, "signal")
    hmat = filter_matrix(GraphFilter.from_taps(parse_floats(cfg.require("taps"))), s)

    estimate = identify_sources(hmat, x, int(cfg.require("k")))

    order = np.argsort(estimate.support)
    write_table(
        cfg.output("sources.csv"),
        "vertex,value",
        [np.array(estimate.support, dtype=np.int64)[order], estimate.values[order]],
    )

    return {
        "support": sorted(estimate.support),
        "residual_norm": estimate.residual_norm,
        "coherence": estimate.coherence,
    }


def run_psd(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    d = decompose(s)
    xs = read_signal(cfg.require("signals"))

    psd = periodogram(d, xs)
    record = psd.to_record()
    if s.is_symmetric:
        record["stationarity_score"] = stationarity_score(sample_covariance(xs), s)

    write_json(cfg.output("psd.json"), record)
    _write_values(cfg.output("psd.csv"), psd.values)

    return {key: value for key, value in record.items() if key != "eigenvalue_index_psd"}


def run_wiener(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    d = decompose(s)
    psd = read_psd(cfg.require("psd"))
    y = read_signal(cfg.require("signal"))

    x = wiener_denoise(d, psd, float(cfg.require("noise_variance")), y)
    write_matrix(cfg.output("signal.csv"), np.real(x))

    return {"signals": int(y.shape[1])}


def run_synth(cfg: RunConfig) -> dict[str, Any]:

    s = _load_gso(cfg)
    d = decompose(s)

    if "psd" in cfg.inputs:
        psd = read_psd(cfg.inputs["psd"])
    elif "kernel" in cfg.parameters:
        psd = PsdEstimate(values=np.real(evaluate_kernel(_kernel(cfg), d.eigenvalues)))
    else:
        raise GspUsageError("Run: synth needs --psd or --kernel.")

    count = int(cfg.get("count", 1))
    xs = synthesize_stationary(d, psd, count, cfg.seed)
    write_matrix(cfg.output("signals.csv"), xs.values)

    return {"count": count}


def run_learn(cfg: RunConfig) -> dict[str, Any]:

    xs = read_signal(cfg.require("signals"))
    n = xs.shape[0]
    method = cfg.get("method", "smooth")

    diagnostics: dict[str, Any] = {"method": method}
    if method == "smooth":
        learned = learn_smooth_laplacian(
            xs,
            float(cfg.require("beta")),
            float(cfg.get("trace", n)),
            int(cfg.get("max_iters", 1000)),
            float(cfg.get("tol", 1e-6)),
        )
        weights = learned.weights()
        graph = learned.to_graph()
        diagnostics.update(learned.diagnostics)
        diagnostics["objective_trace"] = list(learned.objective_trace)
    elif method == "template":
        cov = sample_covariance(xs).matrix
        templates = decompose(Gso.custom(cov)).eigenvectors
        learned = spectral_template_adjacency(
            templates,
            float(cfg.get("sparsity", 1.0)),
            int(cfg.get("max_iters", 2000)),
            float(cfg.get("feasibility_tol", 0.05)),
            float(cfg.get("fit_weight", 50.0)),
        )
        weights = learned.weights()
        graph = learned.to_graph()
        diagnostics.update(learned.diagnostics)
        diagnostics["objective_trace"] = list(learned.objective_trace)
    elif method == "corr":
        graph = correlation_graph(xs, float(cfg.require("threshold")))
        weights = correlation_graph(xs, 0.0).adjacency()
    elif method == "precision":
        ridge = float(cfg.require("ridge"))
        graph = precision_graph(xs, ridge, float(cfg.require("threshold")))
        weights = precision_graph(xs, ridge, 0.0).adjacency()
    else:
        raise GspUsageError(f"Run: unknown learning method {method}.")

    write_graph(cfg.output("edges.csv"), graph)
    write_json(cfg.output("diagnostics.json"), diagnostics)

    results: dict[str, Any] = {"method": method, "edges": graph.n_edges}
    if "truth" in cfg.inputs:
        truth = read_graph(cfg.inputs["truth"])
        peak = float(np.max(np.abs(weights), initial=0.0))
        sweep = threshold_sweep(
            weights, truth, np.linspace(0.0, peak, SWEEP_POINTS, endpoint=False)
        )
        write_table(
            cfg.output("sweep.csv"),
            "threshold,f1",
            [np.array([t for t, _ in sweep]), np.array([f for _, f in sweep])],
        )
        results["best_f1"] = max(f for _, f in sweep)

    return results


def run_var(cfg: RunConfig) -> dict[str, Any]:

    series = read_signal(cfg.require("signals"))
    action = cfg.get("action", "fit")
    model_type = cfg.get("model_type", "graph")
    if model_type not in ("graph", "structural"):
        raise GspUsageError(f"Run: unknown VAR model type {model_type}.")

    if action == "fit":
        if model_type == "graph":
            s = _load_gso(cfg)
            model = fit_graph_var(
                series,
                s,
                int(cfg.require("p")),
                int(cfg.get("l", 0)),
                bool(cfg.get("causal", False)),
            )
        else:
            model = fit_structural_var(
                series,
                int(cfg.require("p")),
                float(cfg.get("lam", 0.0)),
                int(cfg.get("max_iters", 5000)),
                float(cfg.get("tol", 1e-10)),
            )
        write_json(cfg.output("model.json"), model.to_record())
        return {"mode": model.mode, "order": model.order, "residual": model.residual}

    if action == "predict":
        model = VarModel.from_record(read_json(cfg.require("model")))
        s = _load_gso(cfg) if model.mode == "graph-var" else None
        if series.shape[1] < model.order:
            raise GspDataError(
                f"Run: prediction needs {model.order} past signals, got {series.shape[1]}."
            )
        x = predict_var(model, s, series[:, -model.order :])
        write_matrix(cfg.output("signal.csv"), x)
        return {"mode": model.mode, "order": model.order}

    raise GspUsageError(f"Run: unknown VAR action {action}.")


def run_product(cfg: RunConfig) -> dict[str, Any]:

    s_g = _load_gso(cfg)
    s_t = _time_gso(cfg, cfg.get("time_steps"))
    kind = cfg.get("kind", "cartesian")
    product = product_gso(s_g, s_t, kind)

    vals_g = decompose(s_g).eigenvalues
    vals_t = decompose(s_t).eigenvalues
    combined = {
        "kronecker": vals_g[:, None] * vals_t[None, :],
        "cartesian": vals_g[:, None] + vals_t[None, :],
        "strong": vals_g[:, None] * vals_t[None, :] + vals_g[:, None] + vals_t[None, :],
    }[kind]

    write_matrix(cfg.output("operator.csv"), product.matrix)
    _write_values(cfg.output("eigenvalues.csv"), combined.ravel())

    return {"kind": kind, "n": product.n}


def run_jointgft(cfg: RunConfig) -> dict[str, Any]:

    s_g = _load_gso(cfg)
    xs = read_signal(cfg.require("signals"))
    s_t = _time_gso(cfg, xs.shape[1])

    spectrum = joint_gft(decompose(s_g), decompose(s_t), xs)

    write_matrix(cfg.output("spectrum_real.csv"), np.real(spectrum))
    write_matrix(cfg.output("spectrum_imag.csv"), np.imag(spectrum))

    return {"n": int(xs.shape[0]), "t": int(xs.shape[1])}


HANDLERS: dict[str, Callable[[RunConfig], dict[str, Any]]] = {
    "spectrum": run_spectrum,
    "filter": run_filter,
    "interpolate": run_interpolate,
    "ssl": run_ssl,
    "sources": run_sources,
    "psd": run_psd,
    "wiener": run_wiener,
    "synth": run_synth,
    "learn": run_learn,
    "var": run_var,
    "product": run_product,
    "jointgft": run_jointgft,
}


def _load_gso(cfg: RunConfig) -> Gso:
    """Custom operator from --matrix, otherwise the --variant operator of --graph."""

    if "matrix" in cfg.inputs:
        return Gso.custom(read_signal(cfg.inputs["matrix"]))

    graph = read_graph(cfg.require("graph"))
    return make_gso(graph, cfg.get("variant", "laplacian"))


def _time_gso(cfg: RunConfig, steps: Any) -> Gso:
    """Time operator from --time-graph, else the directed cycle of `steps` vertices."""

    if "time_graph" in cfg.inputs:
        graph: Graph = read_graph(cfg.inputs["time_graph"])
        return make_gso(graph, cfg.get("time_variant", "adjacency"))

    if steps is None:
        raise GspUsageError("Run: give --time-graph or --time-steps.")
    return make_gso(directed_cycle(int(steps)), "adjacency")


def _kernel(cfg: RunConfig) -> Kernel:

    name = cfg.require("kernel")
    if name not in KERNEL_FACTORIES:
        raise GspUsageError(
            f"Run: unknown kernel {name}. Should be one of {list(KERNEL_FACTORIES)}."
        )
    return KERNEL_FACTORIES[name](float(cfg.require("kernel_param")))


def _single_signal(cfg: RunConfig, role: str) -> NDArray[np.float64]:

    x = read_signal(cfg.require(role))
    if x.shape[1] != 1:
        raise GspUsageError(f"Run: --{role} should hold a single signal.")
    return x[:, 0]


def _write_values(path: Path, values: NDArray) -> None:
    """`index,value` table, `index,real,imag` for complex values."""

    values = np.asarray(values)
    index = np.arange(values.shape[0], dtype=np.int64)
    if np.iscomplexobj(values):
        write_table(path, "index,real,imag", [index, values.real, values.imag])
    else:
        write_table(path, "index,value", [index, values])
