"""Regenerate the built-in segment tables in src/combalance/data/.

Mass fractions and longitudinal CoM positions (percent of segment length
from the proximal end) are from de Leva (1996), Table 4. The published
female fractions sum to 99.99 %, so every table is rescaled to sum to one.

Joint mapping onto the 25-joint depth-camera skeleton is an approximation:
vertex -> head, C7 -> spine_shoulder, mid-hip -> spine_base, MET3 -> hand,
toe tip -> foot (the heel is not tracked, so the foot runs ankle -> foot).
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from combalance.bsip import canonical_json, table_checksum, table_from_dict  # noqa: E402

# name: (mass % male, CoM % male, mass % female, CoM % female)
DELEVA = {
    "head": (6.94, 50.02, 6.68, 48.41),
    "trunk": (43.46, 51.38, 42.57, 49.64),
    "upper_arm": (2.71, 57.72, 2.55, 57.54),
    "forearm": (1.62, 45.74, 1.38, 45.59),
    "hand": (0.61, 79.00, 0.56, 74.74),
    "thigh": (14.16, 40.95, 14.78, 36.12),
    "shank": (4.33, 44.59, 4.81, 44.16),
    "foot": (1.37, 44.15, 1.29, 40.14),
}

AXIAL = {
    "head": ("head", "spine_shoulder"),
    "trunk": ("spine_shoulder", "spine_base"),
}
LIMB = {
    "upper_arm": ("shoulder", "elbow"),
    "forearm": ("elbow", "wrist"),
    "hand": ("wrist", "hand"),
    "thigh": ("hip", "knee"),
    "shank": ("knee", "ankle"),
    "foot": ("ankle", "foot"),
}

SOURCE = (
    "de Leva P. Adjustments to Zatsiorsky-Seluyanov's segment inertia parameters. "
    "J Biomech. 1996;29(9):1223-1230. Table 4; {note}"
)


def rows(variant):
    out = []
    for name, (mm, cm, mf, cf) in DELEVA.items():
        if variant == "male":
            mass, com = mm, cm
        elif variant == "female":
            mass, com = mf, cf
        else:
            mass, com = (mm + mf) / 2, (cm + cf) / 2
        if name in AXIAL:
            prox, dist = AXIAL[name]
            out.append((name, prox, dist, mass, com, "axial"))
        else:
            for side in ("left", "right"):
                prox, dist = (f"{j}_{side}" for j in LIMB[name])
                out.append((f"{name}_{side}", prox, dist, mass, com, side))
    total = sum(r[3] for r in out)
    return [
        {
            "name": n,
            "proximal": p,
            "distal": d,
            "mass_fraction": m / total,
            "com_ratio": c / 100.0,
            "side": s,
        }
        for n, p, d, m, c, s in out
    ]


def main():
    dest = Path(__file__).resolve().parents[1] / "src" / "combalance" / "data"
    notes = {
        "male": "male values, rescaled to unit sum",
        "female": "female values (published sum 99.99 %), rescaled to unit sum",
        "neutral": "mean of male and female values, rescaled to unit sum",
    }
    for variant in ("male", "female", "neutral"):
        doc = {"variant": variant, "source": SOURCE.format(note=notes[variant]),
               "segments": rows(variant)}
        doc["checksum"] = table_checksum(doc)
        table_from_dict(json.loads(json.dumps(doc)))
        (dest / f"deleva-{variant}.json").write_text(canonical_json(doc), encoding="utf-8", newline="\n")
        print(variant, doc["checksum"])


if __name__ == "__main__":
    main()
