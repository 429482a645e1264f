"""Command line front end.

    extract_features --dataset <dir|name> --out features.rgnf \
        --manifest manifest.json [--batch 256] [--weights pretrained|none|PATH] \
        [--labels-out labels.csv]

Exit codes: 0 ok, 2 bad arguments, 3 dataset/model problem.
"""

import argparse
import logging
import sys

from .datasets import resolve
from .errors import ConfigError, ExtractionError
from .extract import extract, write_label_csv

log = logging.getLogger("extract_features")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="extract_features",
        description="Embed an image dataset into the RGNF binary feature format.",
    )
    p.add_argument("--dataset", required=True,
                   help="image directory, or cifar10-train:<root> / cifar10-test:<root>")
    p.add_argument("--out", required=True, help="output .rgnf path")
    p.add_argument("--manifest", help="manifest JSON path")
    p.add_argument("--batch", type=int, default=256)
    p.add_argument("--weights", default="pretrained",
                   help="'pretrained', 'none' (seeded random), or a state-dict path")
    p.add_argument("--model", default="resnet34")
    p.add_argument("--labels-out",
                   help="also write index,label CSV (classed datasets only)")
    return p


def main(argv=None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        manifest = extract(args.dataset, args.out, manifest_path=args.manifest,
                           model=args.model, weights=args.weights, batch=args.batch)
        if args.labels_out:
            write_label_csv(resolve(args.dataset), args.labels_out)
    except ConfigError as e:
        log.error("%s", e)
        return 2
    except ExtractionError as e:
        log.error("%s", e)
        return 3
    log.info("wrote %s: %d rows, %d-d, sha256 %s",
             args.out, manifest.n_samples, manifest.dim,
             manifest.checksum_sha256[:12])
    return 0


if __name__ == "__main__":
    sys.exit(main())
