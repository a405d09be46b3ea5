#!/usr/bin/env python3
"""Writes the puppet fixtures under fixtures/puppets/.

Artwork units are pixels of a 640x480 camera frame, so the bind pose lines up with the
rest layout of the synthetic generator.
"""
import json
import math
import pathlib
import re

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "puppets"
W, H = 640.0, 480.0

POSE_NAMES = [
    "nose", "leftEye", "rightEye", "leftEar", "rightEar", "leftShoulder", "rightShoulder",
    "leftElbow", "rightElbow", "leftWrist", "rightWrist", "leftHip", "rightHip", "leftKnee",
    "rightKnee", "leftAnkle", "rightAnkle",
]
REST_POSE = [
    (0.500, 0.180), (0.520, 0.160), (0.480, 0.160), (0.545, 0.170), (0.455, 0.170),
    (0.590, 0.300), (0.410, 0.300), (0.640, 0.440), (0.360, 0.440), (0.660, 0.570),
    (0.340, 0.570), (0.560, 0.580), (0.440, 0.580), (0.570, 0.730), (0.430, 0.730),
    (0.575, 0.880), (0.425, 0.880),
]


def face_names():
    names = [f"contour{i}" for i in range(17)]
    names += [f"leftBrow{i}" for i in range(5)] + [f"rightBrow{i}" for i in range(5)]
    names += [f"noseBridge{i}" for i in range(4)] + [f"noseBase{i}" for i in range(5)]
    names += [f"leftEye{i}" for i in range(6)] + [f"rightEye{i}" for i in range(6)]
    names += [f"outerLip{i}" for i in range(12)] + [f"innerLip{i}" for i in range(8)]
    names += ["leftPupil", "rightPupil", "foreheadCenter", "leftCheek", "rightCheek"]
    assert len(names) == 73
    return names


def rest_face():
    cx, cy, rx, ry = 0.5, 0.175, 0.045, 0.06
    out = []

    def ellipse(ccx, ccy, erx, ery, a0, a1, n, closed):
        for k in range(n):
            t = k / n if closed else k / (n - 1)
            a = a0 + (a1 - a0) * t
            out.append((ccx + erx * math.cos(a), ccy + ery * math.sin(a)))

    pi = math.pi
    ellipse(cx, cy, rx, ry, pi * 0.05, pi * 0.95, 17, False)
    ellipse(cx + 0.018, cy - 0.028, 0.012, 0.006, pi * 1.1, pi * 1.9, 5, False)
    ellipse(cx - 0.018, cy - 0.028, 0.012, 0.006, pi * 1.1, pi * 1.9, 5, False)
    for k in range(4):
        out.append((cx, cy - 0.015 + 0.007 * k))
    ellipse(cx, cy + 0.010, 0.008, 0.004, pi * 0.1, pi * 0.9, 5, False)
    ellipse(cx + 0.018, cy - 0.014, 0.008, 0.004, 0.0, 2.0 * pi, 6, True)
    ellipse(cx - 0.018, cy - 0.014, 0.008, 0.004, 0.0, 2.0 * pi, 6, True)
    ellipse(cx, cy + 0.030, 0.018, 0.008, 0.0, 2.0 * pi, 12, True)
    ellipse(cx, cy + 0.030, 0.012, 0.004, 0.0, 2.0 * pi, 8, True)
    out += [(cx + 0.018, cy - 0.014), (cx - 0.018, cy - 0.014), (cx, cy - 0.050),
            (cx + 0.032, cy + 0.010), (cx - 0.032, cy + 0.010)]
    return out


def px(p):
    return [round(p[0] * W, 3), round(p[1] * H, 3)]


POSE = {n: px(p) for n, p in zip(POSE_NAMES, REST_POSE)}
FACE = {n: px(p) for n, p in zip(face_names(), rest_face())}


class Art:
    def __init__(self):
        self.vertices = []
        self.paths = []

    def add(self, pts, closed, stroke, fill, width):
        base = len(self.vertices)
        self.vertices += [[round(x, 3), round(y, 3)] for x, y in pts]
        self.paths.append({"points": list(range(base, base + len(pts))), "closed": closed,
                           "stroke": stroke, "fill": fill, "width": width})


def capsule(a, b, r, n):
    """Outline of a rounded limb from a to b: n samples per side, n per cap."""
    ax, ay = a
    bx, by = b
    ang = math.atan2(by - ay, bx - ax)
    nx, ny = -math.sin(ang), math.cos(ang)
    pts = []
    for k in range(n):
        t = k / (n - 1)
        pts.append((ax + (bx - ax) * t + nx * r, ay + (by - ay) * t + ny * r))
    for k in range(1, n - 1):
        a2 = ang + math.pi / 2 - math.pi * k / (n - 1)
        pts.append((bx + r * math.cos(a2), by + r * math.sin(a2)))
    for k in range(n):
        t = 1 - k / (n - 1)
        pts.append((ax + (bx - ax) * t - nx * r, ay + (by - ay) * t - ny * r))
    for k in range(1, n - 1):
        a2 = ang - math.pi / 2 - math.pi * k / (n - 1)
        pts.append((ax + r * math.cos(a2), ay + r * math.sin(a2)))
    return pts


def circle(c, r, n):
    return [(c[0] + r * math.cos(2 * math.pi * k / n), c[1] + r * math.sin(2 * math.pi * k / n)) for k in range(n)]


def bone(name, a, b, source="pose"):
    return {"name": name, "source": source, "a": a, "b": b}


def stick_figure():
    art = Art()
    s, e, w = POSE["leftShoulder"], POSE["leftElbow"], POSE["leftWrist"]
    art.add([s, e, w], False, "#1f2937", "none", 6.0)
    art.add(circle(w, 8.0, 12), True, "#1f2937", "#f59e0b", 2.0)
    return {
        "name": "stick_figure",
        "vertices": art.vertices,
        "paths": art.paths,
        "bones": [bone("upper_arm", "leftShoulder", "leftElbow"), bone("forearm", "leftElbow", "leftWrist")],
        "bind_keypoints": {"pose": POSE},
    }


LIMBS = [
    ("upper_arm_l", "leftShoulder", "leftElbow"), ("forearm_l", "leftElbow", "leftWrist"),
    ("upper_arm_r", "rightShoulder", "rightElbow"), ("forearm_r", "rightElbow", "rightWrist"),
    ("thigh_l", "leftHip", "leftKnee"), ("shin_l", "leftKnee", "leftAnkle"),
    ("thigh_r", "rightHip", "rightKnee"), ("shin_r", "rightKnee", "rightAnkle"),
]


def mannequin():
    art = Art()
    for _, a, b in LIMBS:
        art.add(capsule(POSE[a], POSE[b], 9.0, 10), True, "#1f2937", "#93c5fd", 2.0)
    ls, rs, lh, rh = POSE["leftShoulder"], POSE["rightShoulder"], POSE["leftHip"], POSE["rightHip"]
    torso = []
    n = 34
    for corner_a, corner_b in ((rs, ls), (ls, lh), (lh, rh), (rh, rs)):
        for k in range(n):
            t = k / n
            torso.append((corner_a[0] + (corner_b[0] - corner_a[0]) * t,
                          corner_a[1] + (corner_b[1] - corner_a[1]) * t))
    art.add(torso, True, "#1f2937", "#60a5fa", 2.0)
    neck = ((ls[0] + rs[0]) / 2, (ls[1] + rs[1]) / 2)
    art.add([neck, (POSE["nose"][0], POSE["nose"][1] + 22.0)], False, "#1f2937", "none", 4.0)
    art.add(circle(POSE["nose"], 24.0, 74), True, "#1f2937", "#fde68a", 2.0)
    assert len(art.vertices) == 500
    bones = [bone(*limb) for limb in LIMBS]
    bones += [bone("shoulders", "rightShoulder", "leftShoulder"), bone("hips", "rightHip", "leftHip"),
              bone("torso", "leftShoulder", "leftHip"), bone("head", "rightEar", "leftEar")]
    return {
        "name": "mannequin",
        "vertices": art.vertices,
        "paths": art.paths,
        "bones": bones,
        "bind_keypoints": {"pose": POSE},
    }


def face_mask():
    art = Art()
    f = FACE

    def pts(prefix, n):
        return [f[f"{prefix}{i}"] for i in range(n)]

    art.add(pts("contour", 17) + [f["foreheadCenter"]], True, "#374151", "#fde68a", 1.5)
    art.add(pts("leftBrow", 5), False, "#374151", "none", 1.5)
    art.add(pts("rightBrow", 5), False, "#374151", "none", 1.5)
    art.add(pts("leftEye", 6), True, "#374151", "#ffffff", 1.0)
    art.add(pts("rightEye", 6), True, "#374151", "#ffffff", 1.0)
    art.add(circle(f["leftPupil"], 1.5, 8), True, "#111827", "#111827", 0.5)
    art.add(circle(f["rightPupil"], 1.5, 8), True, "#111827", "#111827", 0.5)
    art.add(pts("noseBridge", 4) + pts("noseBase", 5), False, "#374151", "none", 1.0)
    art.add(pts("outerLip", 12), True, "#7f1d1d", "#f87171", 1.0)
    art.add(pts("innerLip", 8), True, "#7f1d1d", "#450a0a", 0.5)
    bones = [
        bone("jaw_l", "contour8", "contour16", "face"), bone("jaw_r", "contour8", "contour0", "face"),
        bone("brow_l", "leftBrow0", "leftBrow4", "face"), bone("brow_r", "rightBrow0", "rightBrow4", "face"),
        bone("eye_l", "leftEye3", "leftEye0", "face"), bone("eye_r", "rightEye3", "rightEye0", "face"),
        bone("nose", "noseBridge0", "noseBase2", "face"), bone("mouth", "outerLip6", "outerLip0", "face"),
        bone("mouth_open", "outerLip9", "outerLip3", "face"), bone("forehead", "foreheadCenter", "noseBridge0", "face"),
    ]
    return {
        "name": "face_mask",
        "vertices": art.vertices,
        "paths": art.paths,
        "bones": bones,
        "bind_keypoints": {"face": FACE},
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for doc in (stick_figure(), mannequin(), face_mask()):
        text = json.dumps(doc, indent=1)
        # Keep coordinate pairs and index lists on one line.
        text = re.sub(r"\[\s+([-0-9.,\s]+?)\s+\]", lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text)
        (OUT / f"{doc['name']}.json").write_text(text + "\n")
        print(doc["name"], len(doc["vertices"]), "vertices", len(doc["bones"]), "bones")


if __name__ == "__main__":
    main()
