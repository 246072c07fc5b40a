"""Write the committed toy targets to data/toys/ as PFM rasters."""

import argparse
from pathlib import Path

from ebeam_mdp.formats import write_pfm
from ebeam_mdp.toys import cross_target, l_shape_target, rectangle_target

TARGETS = {
    "rectangle": rectangle_target,
    "l_shape": l_shape_target,
    "cross_wafer": cross_target,
}


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "toys"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, make in TARGETS.items():
        path = out / f"{name}.pfm"
        write_pfm(path, make())
        print(path)


if __name__ == "__main__":
    main()
