#!/usr/bin/env python3
import argparse
from typing import Any

import numpy as np

__version__ = "0.1.0"

from gspkit.commands import dispatch
from gspkit.commands import RunConfig
from gspkit.tools import err_console
from gspkit.tools import GspDataError
from gspkit.tools import GspNumericalError
from gspkit.tools import GspUsageError
from gspkit.tools import set_quiet

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def report_error(code: int, message: Any) -> int:
    """Single machine-parseable stderr line."""

    line = " ".join(str(message).split())
    err_console.print(f"gspkit: error[{code}]: {line}", markup=False, soft_wrap=True)
    return code


class GspArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        report_error(EXIT_USAGE, message)
        raise SystemExit(EXIT_USAGE)


COMMON = GspArgumentParser(add_help=False)
COMMON.add_argument("--seed", metavar="value", help="random seed.", type=int, default=0)
COMMON.add_argument(
    "--out-dir", metavar="directory", help="output directory.", type=str, default="."
)
COMMON.add_argument("--quiet", help="only report errors.", action="store_true")

GRAPH = GspArgumentParser(add_help=False)
GRAPH.add_argument("--graph", metavar="file", help="edge list CSV.", type=str)
GRAPH.add_argument(
    "--matrix", metavar="file", help="dense custom shift operator CSV.", type=str
)
GRAPH.add_argument(
    "--variant",
    metavar="name",
    help="shift operator variant (adjacency, laplacian, normalized, random-walk).",
    type=str,
    default="laplacian",
)

KERNEL = GspArgumentParser(add_help=False)
KERNEL.add_argument("--kernel", metavar="name", help="heat, lowpass or tikhonov.", type=str)
KERNEL.add_argument("--kernel-param", metavar="value", help="kernel parameter.", type=float)

EX_PARSE = GspArgumentParser(
    prog="gspkit",
    description="Graph signal processing toolkit: spectra, filters, sampling, "
    "stationary processes, topology learning and graph-time models.",
)
EX_PARSE.add_argument(
    "-v", "--version", action="version", version=f"gspkit {__version__}"
)
_SUB = EX_PARSE.add_subparsers(dest="command", metavar="command")

_spectrum = _SUB.add_parser(
    "spectrum", parents=[COMMON, GRAPH], help="eigenvalues and GFT of a signal."
)
_spectrum.add_argument("--signal", metavar="file", type=str)

_filter = _SUB.add_parser(
    "filter", parents=[COMMON, GRAPH, KERNEL], help="apply a graph filter."
)
_filter.add_argument("--signal", metavar="file", type=str)
_filter.add_argument("--taps", metavar="h0,h1,...", type=str)
_filter.add_argument("--response", metavar="h0,h1,...", type=str)
_filter.add_argument("--denominator", metavar="a0,a1,...", help="IIR filter.", type=str)
_filter.add_argument("--filter", metavar="file", help="filter JSON.", type=str)
_filter.add_argument(
    "--chebyshev", metavar="order", help="Chebyshev approximation order.", type=int
)
_filter.add_argument("--interval", metavar="lo,hi", type=str)

_interpolate = _SUB.add_parser(
    "interpolate", parents=[COMMON, GRAPH], help="recover a signal from samples."
)
_interpolate.add_argument(
    "--mode", choices=["bandlimited", "regularized"], default="bandlimited"
)
_interpolate.add_argument("--samples", metavar="file", type=str)
_interpolate.add_argument("--k", metavar="value", help="bandwidth.", type=int)
_interpolate.add_argument("--alpha", metavar="value", type=float)
_interpolate.add_argument("--taps", metavar="h0,h1,...", type=str)
_interpolate.add_argument("--truth", metavar="file", type=str)

_ssl = _SUB.add_parser(
    "ssl", parents=[COMMON, GRAPH], help="semi-supervised binary labels."
)
_ssl.add_argument("--labels", metavar="file", type=str)
_ssl.add_argument("--alpha", metavar="value", type=float)
_ssl.add_argument("--taps", metavar="h0,h1,...", type=str)

_sources = _SUB.add_parser(
    "sources", parents=[COMMON, GRAPH], help="sparse diffusion sources."
)
_sources.add_argument("--signal", metavar="file", type=str)
_sources.add_argument("--taps", metavar="h0,h1,...", type=str)
_sources.add_argument("--k", metavar="value", help="number of sources.", type=int)

_psd = _SUB.add_parser(
    "psd", parents=[COMMON, GRAPH], help="periodogram of stationary signals."
)
_psd.add_argument("--signals", metavar="file", type=str)

_wiener = _SUB.add_parser(
    "wiener", parents=[COMMON, GRAPH], help="Wiener denoising."
)
_wiener.add_argument("--signal", metavar="file", type=str)
_wiener.add_argument("--psd", metavar="file", type=str)
_wiener.add_argument("--noise-variance", metavar="value", type=float)

_synth = _SUB.add_parser(
    "synth", parents=[COMMON, GRAPH, KERNEL], help="synthesize stationary signals."
)
_synth.add_argument("--psd", metavar="file", type=str)
_synth.add_argument("--count", metavar="value", type=int, default=1)

_learn = _SUB.add_parser(
    "learn", parents=[COMMON], help="learn a graph from signals."
)
_learn.add_argument(
    "--method", choices=["smooth", "corr", "precision", "template"], default="smooth"
)
_learn.add_argument("--signals", metavar="file", type=str)
_learn.add_argument("--beta", metavar="value", type=float)
_learn.add_argument("--trace", metavar="value", type=float)
_learn.add_argument("--threshold", metavar="value", type=float)
_learn.add_argument("--ridge", metavar="value", type=float)
_learn.add_argument("--sparsity", metavar="value", type=float)
_learn.add_argument("--feasibility-tol", metavar="value", type=float)
_learn.add_argument("--fit-weight", metavar="value", type=float)
_learn.add_argument("--max-iters", metavar="value", type=int)
_learn.add_argument("--tol", metavar="value", type=float)
_learn.add_argument("--truth", metavar="file", help="true edge list for F1 sweeps.", type=str)

_var = _SUB.add_parser(
    "var", parents=[COMMON, GRAPH], help="graph and structural VAR models."
)
_var.add_argument("--action", choices=["fit", "predict"], default="fit")
_var.add_argument("--model-type", choices=["graph", "structural"], default="graph")
_var.add_argument("--signals", metavar="file", type=str)
_var.add_argument("--model", metavar="file", type=str)
_var.add_argument("--p", metavar="value", help="number of lags.", type=int)
_var.add_argument("--l", metavar="value", help="filter order.", type=int)
_var.add_argument("--lambda", dest="lam", metavar="value", type=float)
_var.add_argument("--causal", action="store_true", default=None)
_var.add_argument("--max-iters", metavar="value", type=int)
_var.add_argument("--tol", metavar="value", type=float)

_product = _SUB.add_parser(
    "product", parents=[COMMON, GRAPH], help="product graph shift operator."
)
_product.add_argument(
    "--kind", choices=["kronecker", "cartesian", "strong"], default="cartesian"
)
_product.add_argument("--time-graph", metavar="file", type=str)
_product.add_argument("--time-variant", metavar="name", type=str, default="adjacency")
_product.add_argument("--time-steps", metavar="value", type=int)

_jointgft = _SUB.add_parser(
    "jointgft", parents=[COMMON, GRAPH], help="joint graph-time Fourier transform."
)
_jointgft.add_argument("--signals", metavar="file", help="N x T series.", type=str)
_jointgft.add_argument("--time-graph", metavar="file", type=str)
_jointgft.add_argument("--time-variant", metavar="name", type=str, default="adjacency")


def main(argv: Any) -> int:
    """Run a parsed command line and return its exit code."""

    set_quiet(bool(getattr(argv, "quiet", False)))

    try:
        dispatch(RunConfig.from_args(argv))
    except GspUsageError as err:
        return report_error(EXIT_USAGE, err)
    except (GspNumericalError, np.linalg.LinAlgError) as err:
        return report_error(EXIT_NUMERICAL, err)
    except (GspDataError, ValueError, FileNotFoundError) as err:
        return report_error(EXIT_DATA, err)

    return EXIT_OK
