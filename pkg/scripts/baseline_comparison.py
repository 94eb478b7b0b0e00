"""Proposed scheme against cooperative ZF and frequency division, versus N_c or K_c^m."""

from _common import parser, run


def main():
    p = parser(__doc__.splitlines()[0], default_drops=500)
    p.add_argument("--axis", default="N_C", choices=["N_C", "K_C"])
    p.add_argument("--values", type=int, nargs="+", default=None)
    p.add_argument("--precoder", default="ZF", choices=["MRT", "ZF"])
    args = p.parse_args()
    values = args.values or ([8, 16, 32] if args.axis == "N_C" else [1, 2, 3, 4])
    overrides = [("sp_precoder", args.precoder), ("sweep.axis", args.axis),
                 ("sweep.values", values), ("schemes", ["PROPOSED", "COOP_ZF", "FD"])]
    run(args, overrides, f"baselines_{args.axis.lower()}")


if __name__ == "__main__":
    main()
