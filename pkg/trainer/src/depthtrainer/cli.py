"""Command line: `depthtrainer train` and `depthtrainer infer`."""

from __future__ import annotations

import argparse
import sys

from .inference import run_inference
from .training import TrainConfig, Trainer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="depthtrainer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the generator on a dataset manifest")
    p_train.add_argument("--manifest", required=True)
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--iters", type=int, default=2000)
    p_train.add_argument("--weights", default="1,100,200,10",
                         help="adversarial,l1,foreground,task")
    p_train.add_argument("--lr", type=float, default=0.0002)
    p_train.add_argument("--beta1", type=float, default=0.5)
    p_train.add_argument("--patch-size", type=int, default=64)
    p_train.add_argument("--checkpoint-every", type=int, default=500)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--task-net", default=None,
                         help="TorchScript file of a frozen task network")
    p_train.add_argument("--resume", default=None)
    p_train.add_argument("--device", default=None)

    p_infer = sub.add_parser("infer", help="process tensors with a checkpoint")
    p_infer.add_argument("--checkpoint", required=True)
    p_infer.add_argument("--in", dest="source", required=True,
                         help=".dpz file, directory of them, or a manifest.json")
    p_infer.add_argument("--out", required=True)
    p_infer.add_argument("--device", default="cpu")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "train":
        cfg = TrainConfig(
            manifest=args.manifest, out_dir=args.out, iterations=args.iters,
            weights=tuple(float(w) for w in args.weights.split(",")),
            learning_rate=args.lr, beta1=args.beta1, patch_size=args.patch_size,
            checkpoint_every=args.checkpoint_every, seed=args.seed,
            task_net=args.task_net)
        trainer = Trainer(cfg, device=args.device)
        if args.resume:
            trainer.load_checkpoint(args.resume)
        final = trainer.run()
        print(f"final checkpoint: {final}")
        return 0
    if args.command == "infer":
        written = run_inference(args.checkpoint, args.source, args.out, args.device)
        print(f"processed {len(written)} tensors into {args.out}")
        return 0
    return 1


if __name__ == "__main__":
    sys.exit(main())
