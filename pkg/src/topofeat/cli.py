"""Command-line entry point: ``topofeat <command> ...``.

Exit status: 0 success, 1 usage error, 2 I/O failure, 3 when every input
was degenerate (no usable point cloud).
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .complex import DegenerateInputError
from .evaluation import (LogisticModel, evaluate, iou_scores, stratified_split, synth_dataset,
                         train_logistic, write_dataset)
from .imaging import ImageFormatError, read_pgm_raw
from .pipeline import (BUILDERS, FeatureRecord, TransformerConfig, diagram_for, extract_batch, featurize,
                       format_csv, load_cloud, read_features_csv, write_features_csv)
from .pointcloud import sample_annulus, sample_disc, write_points

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DEGENERATE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _transformer_args(p: argparse.ArgumentParser, with_feature: bool = True):
    p.add_argument("--method", choices=("resize", "contour"), default="resize",
                   help="image to point-cloud conversion")
    if with_feature:
        p.add_argument("--feature", choices=("silhouette", "signature"), default="silhouette")
    p.add_argument("--grid", type=int, default=64, help="resize grid side")
    p.add_argument("--fraction", type=float, default=0.05, help="bright-pixel fraction for contour")
    p.add_argument("--min-area", type=int, default=1, help="smallest contour region kept, in pixels")
    p.add_argument("--resolution", type=int, help="samples per path (default 200 silhouette, 100 landscape)")


def _config(args, feature: str | None = None) -> TransformerConfig:
    return TransformerConfig(args.method, feature or args.feature, args.grid, args.fraction,
                             args.resolution, min_area=args.min_area)


# --- commands ----------------------------------------------------------------------

def cmd_extract(args) -> int:
    res = extract_batch(args.dir, _config(args), args.out, args.workers)
    print(f"written\t{res.written}\nfailed\t{res.failed}\ndegenerate\t{res.degenerate}")
    if res.written and res.degenerate == res.written:
        return EXIT_DEGENERATE
    return EXIT_OK


def cmd_diagram(args) -> int:
    dgm = diagram_for(load_cloud(args.input, _config(args, "silhouette")), args.complex, args.squared)
    Path(args.out).write_text(dgm.to_text())
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.kind == "dataset":
        n = write_dataset(synth_dataset(args.n, args.seed), args.out)
        print(f"images\t{n}")
        return EXIT_OK
    if args.kind == "disc":
        pc = sample_disc(args.n, args.seed)
    else:
        pc = sample_annulus(args.n, args.r_in, args.r_out, args.seed)
    write_points(pc, args.out, comment=f"{args.kind} n={args.n} seed={args.seed}")
    return EXIT_OK


def cmd_split(args) -> int:
    train, test = stratified_split(read_features_csv(args.input), args.test_fraction, args.seed)
    write_features_csv(train, args.train_out)
    write_features_csv(test, args.test_out)
    print(f"train\t{len(train)}\ntest\t{len(test)}")
    return EXIT_OK


def cmd_train(args) -> int:
    data = read_features_csv(args.input)
    model = train_logistic(data, args.epochs, args.batch, args.eta_max, args.eta_min, args.seed)
    Path(args.out).write_text(model.to_json())
    if model.loss_trace:
        print(f"final_loss\t{model.loss_trace[-1]!r}")
    return EXIT_OK


def cmd_eval(args) -> int:
    model = LogisticModel.from_json(Path(args.model).read_text())
    data = read_features_csv(args.input, model.class_names)
    res = evaluate(model, data)
    print(f"accuracy\t{res.accuracy!r}")
    print("\t".join(["true\\pred"] + model.class_names))
    for name, row in zip(model.class_names, res.confusion):
        print("\t".join([name] + [str(v) for v in row]))
    return EXIT_OK


def cmd_iou(args) -> int:
    pred, _ = read_pgm_raw(args.pred)
    truth, _ = read_pgm_raw(args.truth)
    rep = iou_scores(pred, truth, args.classes)
    print("class\tiou\tvalue\tabsent")
    for c, (v, a) in enumerate(zip(rep.per_class, rep.absent)):
        print(f"{c}\t{v}\t{float(v)!r}\t{int(a)}")
    print(f"total\t{rep.total}\t{float(rep.total)!r}")
    print(f"total_present\t{rep.total_present}\t{float(rep.total_present)!r}")
    return EXIT_OK


def cmd_report(args) -> int:
    """Diagram, features and figures for one input, written into ``--out-dir``."""
    from . import plotting  # matplotlib is only needed here
    from .vectorize import landscapes, silhouette

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = _config(args)
    pc = load_cloud(args.input, cfg)
    # squared radius throughout, so reports of different complexes compare directly
    dgm = diagram_for(pc, args.complex, squared=True)
    feats = featurize(dgm, cfg)
    write_points(pc, out / "points.txt")
    (out / "diagram.txt").write_text(dgm.to_text())
    rec = FeatureRecord(Path(args.input).stem, None, feats.ravel(), cfg.shape)
    (out / "features.csv").write_text(format_csv([rec], feats.size))
    figures = [plotting.plot_cloud(pc, out / "cloud.png"),
               plotting.plot_diagram(dgm, out / "diagram.png")]
    for d in (0, 1):
        figures.append(plotting.plot_landscapes(landscapes(dgm, d, cfg.k_max), out / f"landscapes_h{d}.png",
                                                title=f"H{d} landscapes"))
    sils = {d: silhouette(dgm, d) for d in (0, 1)}
    figures.append(plotting.plot_silhouettes(sils, out / "silhouettes.png"))
    print("kind\tpath")
    for name in ("points.txt", "diagram.txt", "features.csv"):
        print(f"data\t{out / name}")
    for f in figures:
        print(f"figure\t{f}")
    return EXIT_OK


# --- parser --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="topofeat", description="Topological feature extraction for images and point clouds.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("extract", help="featurize a directory of images into a CSV")
    _transformer_args(e)
    e.add_argument("--workers", type=int, help="worker processes (capped by TOPOFEAT_THREADS)")
    e.add_argument("--out", required=True, help="output CSV")
    e.add_argument("dir", help="image directory; subdirectories name the labels")
    e.set_defaults(func=cmd_extract)

    d = sub.add_parser("diagram", help="persistence diagram of a point file or image")
    d.add_argument("--complex", choices=sorted(BUILDERS), default="alpha")
    d.add_argument("--squared", action="store_true", help="report rips/cech values squared")
    _transformer_args(d, with_feature=False)
    d.add_argument("--out", required=True)
    d.add_argument("input")
    d.set_defaults(func=cmd_diagram)

    s = sub.add_parser("synth", help="seeded point clouds or the blob image dataset")
    s.add_argument("kind", choices=("disc", "annulus", "dataset"))
    s.add_argument("--n", type=int, required=True, help="points, or images per class for dataset")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--r-in", type=float, default=0.5)
    s.add_argument("--r-out", type=float, default=1.0)
    s.add_argument("--out", required=True, help="point file, or directory for dataset")
    s.set_defaults(func=cmd_synth)

    sp = sub.add_parser("split", help="stratified train/test split of a feature CSV")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--test-fraction", type=float, default=0.2)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--train-out", required=True)
    sp.add_argument("--test-out", required=True)
    sp.set_defaults(func=cmd_split)

    t = sub.add_parser("train", help="fit the logistic baseline")
    t.add_argument("--in", dest="input", required=True)
    t.add_argument("--epochs", type=int, default=100)
    t.add_argument("--batch", type=int, default=32)
    t.add_argument("--eta-max", type=float, default=0.1)
    t.add_argument("--eta-min", type=float, default=0.0)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out", required=True, help="model JSON")
    t.set_defaults(func=cmd_train)

    v = sub.add_parser("eval", help="accuracy and confusion matrix of a model")
    v.add_argument("--model", required=True)
    v.add_argument("--in", dest="input", required=True)
    v.set_defaults(func=cmd_eval)

    i = sub.add_parser("iou", help="per-class IoU of two PGM label masks")
    i.add_argument("--pred", required=True)
    i.add_argument("--truth", required=True)
    i.add_argument("--classes", type=int, required=True)
    i.set_defaults(func=cmd_iou)

    r = sub.add_parser("report", help="diagram, features and figures for one input")
    r.add_argument("--complex", choices=sorted(BUILDERS), default="alpha")
    _transformer_args(r)
    r.add_argument("--out-dir", required=True)
    r.add_argument("input")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DegenerateInputError as exc:
        print(f"topofeat: degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (OSError, ImageFormatError) as exc:
        print(f"topofeat: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # invalid values: bad radii, malformed point or CSV rows, Čech size cap
        print(f"topofeat: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
