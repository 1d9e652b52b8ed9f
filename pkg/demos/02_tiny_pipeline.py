"""Run the full three-stage pipeline at toy scale through the CLI.

Generates a small dataset, trains the classifier (stage 1), the VAE
(stage 2), and one qLST model for AV1 (stage 3), then exports a global
traversal bundle. Everything lands in ./demo-output; re-running with the
same seeds reproduces every file byte-for-byte.

Takes a few minutes on one CPU.  Run:  python3 demos/02_tiny_pipeline.py
"""

from pathlib import Path

from qlst.cli import main as qlst

OUT = Path("demo-output")


def run(*argv: str) -> None:
    print(f"$ qlst {' '.join(argv)}")
    rc = qlst(list(argv))
    if rc != 0:
        raise SystemExit(rc)


def main() -> None:
    OUT.mkdir(exist_ok=True)
    data = OUT / "data.jsonl"

    run("gen-data", "--n", "2000", "--seed", "7", "--out", str(data))
    run("train-clf", "--data", str(data), "--out", str(OUT / "clf"),
        "--arch", "mlp", "--epochs", "4", "--seed", "0")
    run("train-vae", "--data", str(data), "--out", str(OUT / "vae"),
        "--epochs", "10", "--seed", "0")
    run("train-qlst", "--data", str(data), "--out", str(OUT / "qlst-av1"),
        "--clf", str(OUT / "clf"), "--vae", str(OUT / "vae"),
        "--class", "AV1", "--epochs", "4", "--seed", "0")
    run("explain", "--global", "--class", "AV1",
        "--qlst", str(OUT / "qlst-av1"), "--vae", str(OUT / "vae"),
        "--clf", str(OUT / "clf"), "--out", str(OUT / "bundle.json"))

    print(f"\nartifacts in {OUT}/ — every checkpoint directory contains a "
          f"run-manifest.json recording the config and input hashes")


if __name__ == "__main__":
    main()
