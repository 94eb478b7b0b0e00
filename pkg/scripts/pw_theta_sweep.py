"""Average rate versus virtual transmit power for several weights theta.

With ``--precoder MRT`` (default) this reports r_bar for the proposed scheme
and for the virtual signal; with ``--precoder ZF`` look at r_min_bar.
"""

from _common import parser, pw_grid_dbm, run


def main():
    p = parser(__doc__.splitlines()[0])
    p.add_argument("--antennas", type=int, default=4)
    p.add_argument("--precoder", default="MRT", choices=["MRT", "ZF"])
    p.add_argument("--thetas", type=float, nargs="+", default=[0.1, 0.3, 0.5, 0.7, 0.9])
    args = p.parse_args()
    grid = ["auto"] + pw_grid_dbm()
    overrides = [("topology.antennas", args.antennas), ("sp_precoder", args.precoder),
                 ("sweep.axis", "P_W"), ("sweep.values", grid),
                 ("solver.theta", args.thetas), ("schemes", ["PROPOSED", "VIRTUAL_ONLY"])]
    run(args, overrides, f"pw_theta_{args.precoder.lower()}_n{args.antennas}")


if __name__ == "__main__":
    main()
