"""Rates under imperfect CSI: precoders designed on corrupted channels, evaluated on true ones."""

from _common import parser, run


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--antennas", type=int, default=16)
    p.add_argument("--errors", type=float, nargs="+", default=[0.0, 0.01, 0.03, 0.1, 0.3])
    p.add_argument("--precoder", default="ZF", choices=["MRT", "ZF"])
    args = p.parse_args()
    overrides = [("topology.antennas", args.antennas), ("sp_precoder", args.precoder),
                 ("sweep.axis", "E_H"), ("sweep.values", args.errors),
                 ("schemes", ["PROPOSED", "COOP_ZF", "FD"])]
    run(args, overrides, "csi_error")


if __name__ == "__main__":
    main()
