import sys
import argparse
from dotenv import load_dotenv

from core.base.errors import ConfigError, KoopboundError
from core.bounds.report import THEOREMS
from cli.commands import cmd_bound, cmd_kernel, cmd_train, cmd_verify
from verify.suites import SUITES


def build_parser() -> argparse.ArgumentParser:
    formatter = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="koopbound", description="Koopman-operator Rademacher bounds for deep networks",
                                     formatter_class=formatter)
    subparsers = parser.add_subparsers(dest="command", required=True)

    bound = subparsers.add_parser("bound", help="evaluate a bound on a network spec", formatter_class=formatter)
    bound.add_argument("--spec", required=True, help="network spec YAML file")
    bound.add_argument("--theorem", choices=THEOREMS, default="thm1", help="bound to evaluate")
    bound.add_argument("--samples", type=int, default=100, help="sample size S")
    bound.add_argument("--cap", type=float, default=None, help="cap D on determinant-type factors")
    bound.add_argument("--report", default=None, help="write the BoundReport JSON here")
    bound.add_argument("--alpha", choices=("estimate", "conservative"), default="estimate",
                       help="alpha factors by Monte Carlo or set to 1")
    bound.add_argument("--hat-mode", choices=("propagated", "activation_range"), default="propagated",
                       help="coefficient boxes for the cnn kernel-volume factors")
    bound.add_argument("--mc-samples", type=int, default=200_000, help="Monte Carlo samples for alpha and ||v||")
    bound.add_argument("--seed", type=int, default=0, help="root seed")
    bound.add_argument("--tradeoff", type=float, nargs="*", default=None,
                       help="also print the weight-scale tradeoff profile at these scales")
    bound.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a spec field")
    bound.set_defaults(func=cmd_bound)

    verify = subparsers.add_parser("verify", help="run Monte Carlo verification suites", formatter_class=formatter)
    verify.add_argument("--suite", choices=SUITES, default="all", help="suite to run")
    verify.add_argument("--seed", type=int, default=0, help="root seed")
    verify.add_argument("--report", default=None, help="write the VerificationReport JSON here")
    verify.add_argument("--quick", action="store_true", help="reduced sample sizes")
    verify.add_argument("--workers", type=int, default=None, help="process pool size (KOOPBOUND_WORKERS or cpu count)")
    verify.set_defaults(func=cmd_verify)

    train = subparsers.add_parser("train", help="run a training experiment", formatter_class=formatter)
    train.add_argument("--config", required=True, help="YAML file with a train: section")
    train.add_argument("--runs", type=int, default=1, help="independent runs")
    train.add_argument("--out", default="output", help="directory for the CSV logs")
    train.add_argument("--seed", type=int, default=None, help="override data_seed and init_seed")
    train.add_argument("--workers", type=int, default=None, help="process pool size over runs")
    train.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a train field")
    train.set_defaults(func=cmd_train)

    kernel = subparsers.add_parser("kernel", help="dump a Gram matrix of random parameter tuples", formatter_class=formatter)
    kernel.add_argument("--spec", required=True, help="network spec YAML file (template)")
    kernel.add_argument("--tuples", type=int, default=8, help="number of random parameter tuples")
    kernel.add_argument("--seed", type=int, default=0, help="root seed")
    kernel.add_argument("--out", default="output/gram.csv", help="CSV file for the Gram entries")
    kernel.add_argument("--samples", type=int, default=200_000, help="Monte Carlo samples")
    kernel.add_argument("--cap", type=float, default=2.0, help="cap on |det W|^(-1/2) of the random tuples")
    kernel.add_argument("--workers", type=int, default=None, help="process pool size")
    kernel.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a spec field")
    kernel.set_defaults(func=cmd_kernel)
    return parser


def main(argv=None) -> int:
    # 加载环境变量
    load_dotenv()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except KoopboundError as e:
        # 领域错误（定理不适用、约束违反、训练发散）退出码 1
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    exit(main())
