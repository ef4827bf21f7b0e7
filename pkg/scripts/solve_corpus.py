"""Run `uone solve` on every sentence of a corpus and keep the certificates.

Each sentence gets a numbered directory per class under OUT; a summary.tsv lists
the exit code of every run. Two invocations with the same options should leave
byte-identical trees.

    python3 scripts/solve_corpus.py tests/data/corpus50.u1 /tmp/run1 --no-fast-path
"""

import argparse
import contextlib
import io
from pathlib import Path

from uone.cli import main as uone


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus")
    ap.add_argument("out")
    ap.add_argument("--classes", default="Ofin,O,WO")
    ap.add_argument("--profile", default="desk")
    ap.add_argument("--no-fast-path", action="store_true")
    args = ap.parse_args(argv)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = [ln.strip() for ln in Path(args.corpus).read_text().splitlines()]
    sentences = [ln for ln in lines if ln and not ln.startswith("#")]
    rows = []
    for i, text in enumerate(sentences):
        src = out / f"{i:02d}.u1"
        src.write_text(text + "\n")
        for K in args.classes.split(","):
            cert = out / f"{i:02d}-{K}"
            argv = ["solve", str(src), "--class", K, "--profile", args.profile, "--out", str(cert)]
            if args.no_fast_path:
                argv.append("--no-fast-path")
            with contextlib.redirect_stdout(io.StringIO()):
                code = uone(argv)
            rows.append(f"{i}\t{K}\t{code}")
    (out / "summary.tsv").write_text("\n".join(rows) + "\n")


if __name__ == "__main__":
    main()
