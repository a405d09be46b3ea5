#!/usr/bin/env python3
"""Writes the wire-format golden vectors under fixtures/golden/.

The byte layout here is assembled with Python's struct module, independently of the C++
encoder, so the C++ tests compare two implementations of the same format.
"""
import json
import math
import pathlib
import struct

OUT = pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "golden"


def q16(x: float) -> int:
    x = min(max(x, 0.0), 1.0)
    return int(math.floor(x * 65535 + 0.5))


def pose_block(pose):
    out = b""
    for (x, y, c) in pose["keypoints"]:
        out += struct.pack(">HHH", q16(x), q16(y), q16(c))
    out += struct.pack(">H", q16(pose["score"]))
    assert len(out) == 104
    return out


def face_block(face):
    out = b""
    for (x, y) in face["points"]:
        out += struct.pack(">HH", q16(x), q16(y))
    out += struct.pack(">f", face["score"])
    assert len(out) == 296
    return out


def frame_bytes(frame):
    flags = (1 if "pose" in frame else 0) | (2 if "face" in frame else 0)
    out = struct.pack(">BBHI", 1, flags, frame["seq"], frame["capture_ts_ms"])
    if "pose" in frame:
        out += pose_block(frame["pose"])
    if "face" in frame:
        out += face_block(frame["face"])
    return out


def zigzag(d: int) -> int:
    return 2 * d if d >= 0 else -2 * d - 1


def varint(v: int) -> bytes:
    out = bytearray()
    while v >= 0x80:
        out.append((v & 0x7F) | 0x80)
        v >>= 7
    out.append(v)
    return bytes(out)


def values(frame):
    vals = []
    if "pose" in frame:
        for (x, y, c) in frame["pose"]["keypoints"]:
            vals += [q16(x), q16(y), q16(c)]
        vals.append(q16(frame["pose"]["score"]))
    if "face" in frame:
        for (x, y) in frame["face"]["points"]:
            vals += [q16(x), q16(y)]
    return vals


def delta_frame_bytes(prev, cur):
    flags = (1 if "pose" in cur else 0) | (2 if "face" in cur else 0) | 4
    out = struct.pack(">BBHI", 1, flags, cur["seq"], cur["capture_ts_ms"])
    for a, b in zip(values(prev), values(cur)):
        out += varint(zigzag(b - a))
    if "face" in cur:
        out += struct.pack(">f", cur["face"]["score"])
    return out


def zero_pose():
    return {"keypoints": [[0.0, 0.0, 0.0] for _ in range(17)], "score": 0.0}


def zero_face():
    return {"points": [[0.0, 0.0] for _ in range(73)], "score": 0.0}


def patterned_pose():
    return {
        "keypoints": [[i / 64, 1 - i / 32, (i % 5) / 4] for i in range(17)],
        "score": 0.75,
    }


def patterned_face():
    return {"points": [[(i % 9) / 8, i / 128] for i in range(73)], "score": 0.625}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    pose_kp0 = zero_pose()
    pose_kp0["keypoints"][0] = [0.5, 0.25, 1.0]
    face_pt0 = zero_face()
    face_pt0["points"][0] = [0.5, 0.5]
    face_pt0["score"] = 1.0

    full = {"seq": 0x1234, "capture_ts_ms": 0x01020304,
            "pose": patterned_pose(), "face": patterned_face()}
    pose_only = {"seq": 7, "capture_ts_ms": 100, "pose": patterned_pose()}
    face_only = {"seq": 65535, "capture_ts_ms": 4294967295, "face": patterned_face()}
    moved = json.loads(json.dumps(full))
    moved["seq"] = 0x1235
    moved["capture_ts_ms"] = 0x01020304 + 100
    moved["pose"]["keypoints"][0][0] = 1 / 64 + 1 / 65535  # +1 lattice step on x0
    moved["face"]["points"][10] = [0.0, 1.0]

    vectors = []

    def emit(name, data, kind, **inputs):
        (OUT / f"{name}.bin").write_bytes(data)
        vectors.append({"name": name, "kind": kind, "file": f"{name}.bin",
                        "size": len(data), **inputs})

    emit("pose_keypoint0", pose_block(pose_kp0), "pose_block", pose=pose_kp0)
    emit("face_point0", face_block(face_pt0), "face_block", face=face_pt0)
    emit("frame_full", frame_bytes(full), "frame", frame=full)
    emit("frame_pose_only", frame_bytes(pose_only), "frame", frame=pose_only)
    emit("frame_face_only", frame_bytes(face_only), "frame", frame=face_only)
    emit("delta_static", delta_frame_bytes(full, dict(full, seq=0x1235)), "delta_frame",
         prev=full, frame=dict(full, seq=0x1235))
    emit("delta_moved", delta_frame_bytes(full, moved), "delta_frame", prev=full, frame=moved)

    (OUT / "vectors.json").write_text(json.dumps({"vectors": vectors}, indent=1) + "\n")


if __name__ == "__main__":
    main()
