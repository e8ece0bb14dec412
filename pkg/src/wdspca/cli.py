"""Command-line entry point: ``wdspca <subcommand> ...``.

Usage errors exit with status 2, data and I/O errors with status 1.  Every
output is written to a temp file and renamed, so a failed command leaves no
partial file behind.
"""

from __future__ import annotations

import argparse
import sys

from . import io, metrics, pca, prtf, shape, synth
from .crossval import partition, run_crossval
from .errors import WdsError
from .pca import DataMatrix


def _cmd_fit(args: argparse.Namespace) -> None:
    io.write_model(args.out, pca.fit(io.read_data(args.input)))


def _cmd_cpv(args: argparse.Namespace) -> None:
    model = io.read_model(args.model)
    curve = pca.cpv_curve(model)
    with io.atomic_open(args.out, binary=False) as fh:
        fh.write("m,cpv\n")
        for m, c in enumerate(curve.tolist()):
            fh.write(f"{m},{c:.17g}\n")
    if args.threshold is not None:
        print(pca.components_for_cpv(model, args.threshold))


def _cmd_reduce(args: argparse.Namespace) -> None:
    model = io.read_model(args.model)
    data = io.read_data(args.input)
    if args.m > model.n_components:
        raise WdsError(f"--m {args.m} exceeds the model's {model.n_components} components")
    approx = pca.reconstruct(model, pca.truncate(pca.transform(model, data), args.m))
    io.write_data(args.out, DataMatrix(approx, data.subject_ids))
    print(f"mse {metrics.mse(approx, data.values):.17g}")


def _cmd_sample(args: argparse.Namespace) -> None:
    model = io.read_model(args.model)
    batch = shape.sample_shapes(model, args.count, args.seed)
    io.write_data(args.out_shapes, batch.shapes)
    if args.out_weights:
        io.write_data(args.out_weights, DataMatrix(batch.weights.reshape(args.count, model.n_components)))


def _cmd_export_mesh(args: argparse.Namespace) -> None:
    shapes = io.read_data(args.shapes)
    if not 0 <= args.row < shapes.n_rows:
        raise WdsError(f"--row {args.row} outside 0..{shapes.n_rows - 1}")
    row = shapes.values[args.row]
    scalars = None
    if args.distance_to_mean:
        scalars = shape.distance_to_mean(io.read_model(args.model), row)
    _, sidecar = shape.export_mesh(args.out, shape.unflatten_cloud(row), io.read_topology(args.topology), scalars)
    if sidecar is not None:
        print(sidecar)


def _cmd_crossval(args: argparse.Namespace) -> None:
    data = io.read_data(args.input)
    part = partition(data.n_rows, args.folds, args.seed, shuffle=not args.contiguous)
    top = part.max_m()
    ms = list(range(0, top + 1, args.m_step))
    if ms[-1] != top:
        ms.append(top)
    report = run_crossval(data, args.folds, args.seed, ms, shuffle=not args.contiguous)
    io.write_report(args.out, report)


def _cmd_synth(args: argparse.Namespace) -> None:
    spectrum = None
    if args.spectrum:
        spectrum = [float(v) for v in args.spectrum.split(",") if v.strip()]
    data, truth = synth.make(args.rows, args.cols, args.rank, spectrum, args.noise, args.seed)
    io.write_data(args.out, data)
    if args.out_truth:
        io.write_model(args.out_truth, truth)


def _cmd_prtf_flatten(args: argparse.Namespace) -> None:
    t = io.read_tensor(args.tensor)
    if t.scale is prtf.Scale.LINEAR:
        t = prtf.log_magnitude(t)
    io.write_data(args.out, prtf.to_data_matrix(t))


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _folds(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("need at least 2 folds")
    return v


def _threshold(text: str) -> float:
    v = float(text)
    if not 0.0 < v <= 100.0:
        raise argparse.ArgumentTypeError("must lie in (0, 100]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wdspca", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("fit", help="fit a PCA model (.wdsp) to a data matrix (.wdsm or .csv)")
    s.add_argument("--input", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_fit)

    s = sub.add_parser("cpv", help="write the m,cpv curve; print the m reaching --threshold")
    s.add_argument("--model", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--threshold", type=_threshold)
    s.set_defaults(func=_cmd_cpv)

    s = sub.add_parser("reduce", help="project, keep m components, reconstruct")
    s.add_argument("--model", required=True)
    s.add_argument("--input", required=True)
    s.add_argument("--m", type=_nonneg, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_reduce)

    s = sub.add_parser("sample", help="draw synthetic shapes from a model")
    s.add_argument("--model", required=True)
    s.add_argument("--count", type=_nonneg, required=True)
    s.add_argument("--seed", type=_nonneg, default=0)
    s.add_argument("--out-shapes", required=True)
    s.add_argument("--out-weights")
    s.set_defaults(func=_cmd_sample)

    s = sub.add_parser("export-mesh", help="write one shape row as an OBJ mesh")
    s.add_argument("--shapes", required=True)
    s.add_argument("--row", type=_nonneg, required=True)
    s.add_argument("--topology", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--distance-to-mean", action="store_true")
    s.add_argument("--model")
    s.set_defaults(func=_cmd_export_mesh)

    s = sub.add_parser("crossval", help="K-fold cross-validated reconstruction error")
    s.add_argument("--input", required=True)
    s.add_argument("--folds", type=_folds, default=20)
    s.add_argument("--seed", type=_nonneg, default=0)
    s.add_argument("--m-step", type=_positive, default=1)
    s.add_argument("--contiguous", action="store_true", help="contiguous index blocks instead of a seeded shuffle")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_crossval)

    s = sub.add_parser("synth", help="generate a low-rank dataset with known model")
    s.add_argument("--rows", type=_positive, required=True)
    s.add_argument("--cols", type=_positive, required=True)
    s.add_argument("--rank", type=_nonneg, required=True)
    s.add_argument("--spectrum", help="comma-separated singular values (default rank..1)")
    s.add_argument("--noise", type=float, default=0.0)
    s.add_argument("--seed", type=_nonneg, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--out-truth")
    s.set_defaults(func=_cmd_synth)

    s = sub.add_parser("prtf-flatten", help="PRTF tensor (.wdst) to dB data matrix")
    s.add_argument("--tensor", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_prtf_flatten)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "export-mesh" and args.distance_to_mean and not args.model:
        parser.error("--distance-to-mean requires --model")
    try:
        args.func(args)
    except (WdsError, OSError) as exc:
        print(f"wdspca {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
