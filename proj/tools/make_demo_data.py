#!/usr/bin/env python3
"""Regenerates data/demo: a camera drop directory with mock backend answers,
a small annotated image set, and a detection interchange file.

Deterministic; rerun after changing anything below.
"""
import hashlib
import io
import json
import random
import shutil
from pathlib import Path

from PIL import Image, ImageDraw

ROOT = Path(__file__).resolve().parent.parent / "data" / "demo"
SPECIES = ["Pica pica", "Columba palumbus", "Erithacus rubecula", "Passer domesticus",
           "Cyanistes caeruleus", "Garrulus glandarius"]


def jpeg(seed, w=96, h=72):
    rng = random.Random(seed)
    img = Image.new("RGB", (w, h), (rng.randrange(60, 120), rng.randrange(90, 150), rng.randrange(40, 90)))
    d = ImageDraw.Draw(img)
    for _ in range(3):
        x, y = rng.randrange(0, w - 20), rng.randrange(0, h - 20)
        d.ellipse([x, y, x + rng.randrange(8, 20), y + rng.randrange(8, 20)],
                  fill=(rng.randrange(256), rng.randrange(256), rng.randrange(256)))
    buf = io.BytesIO()
    img.save(buf, "JPEG", quality=70)
    return buf.getvalue()


def drop(rng):
    fixtures = {}
    expect = {"images": 0, "blank_images": 0, "detection_images": 0, "detection_records": 0}
    for cam, n in (("CAM-01", 8), ("CAM-02", 6)):
        d = ROOT / "drop" / cam
        d.mkdir(parents=True)
        for i in range(n):
            data = jpeg(f"{cam}-{i}")
            name = f"IMG_{i:04d}.JPG"
            (d / name).write_bytes(data)
            (d / f"IMG_{i:04d}.meta").write_text(f"camera_id={cam}\ntime=2021-05-{10 + i:02d}T05:{10 + i:02d}:00Z\n")
            expect["images"] += 1
            kind = rng.random()
            if kind < 0.3:
                expect["blank_images"] += 1
                continue  # no answer: the backend sees nothing
            dets = []
            for _ in range(rng.randint(1, 3)):
                x, y = rng.randrange(0, 40), rng.randrange(0, 30)
                dets.append({"label": rng.choice(SPECIES), "score": round(rng.uniform(0.2, 0.98), 2),
                             "box": [x, y, x + rng.randrange(10, 50), y + rng.randrange(10, 40)]})
            kept = [x for x in dets if x["score"] > 0.5]
            if kept:
                expect["detection_images"] += 1
                expect["detection_records"] += len(kept)
            else:
                expect["blank_images"] += 1
            fixtures[hashlib.sha256(data).hexdigest()] = dets
    (ROOT / "mock").mkdir()
    (ROOT / "mock" / "detections.json").write_text(json.dumps(fixtures, indent=1, sort_keys=True) + "\n")
    return expect


def annotations(rng):
    (ROOT / "annotations").mkdir()
    (ROOT / "images").mkdir()
    for i in range(12):
        name = f"bird_{i:03d}.jpg"
        w, h = 96, 72
        (ROOT / "images" / name).write_bytes(jpeg(f"ann-{i}", w, h))
        objs = []
        if i == 4:
            objs.append(("no good", (0, 0, 10, 10)))
        elif i != 7:  # bird_007 has no objects and is filtered out
            for _ in range(rng.randint(1, 2)):
                x, y = rng.randrange(0, 50), rng.randrange(0, 30)
                objs.append((rng.choice(SPECIES), (x, y, x + rng.randrange(10, 40), y + rng.randrange(10, 40))))
        body = "".join(
            f"<object><name>{n}</name><pose>Unspecified</pose><truncated>0</truncated><difficult>0</difficult>"
            f"<bndbox><xmin>{b[0]}</xmin><ymin>{b[1]}</ymin><xmax>{b[2]}</xmax><ymax>{b[3]}</ymax></bndbox></object>"
            for n, b in objs)
        xml = (f"<annotation><folder>images</folder><filename>{name}</filename>"
               f"<size><width>{w}</width><height>{h}</height><depth>3</depth></size>{body}</annotation>\n")
        (ROOT / "annotations" / f"bird_{i:03d}.xml").write_text(xml)


def interchange(rng):
    lines = []
    for i in range(20):
        truths, dets = [], []
        for _ in range(rng.randint(0, 3)):
            x, y = rng.randrange(0, 300), rng.randrange(0, 300)
            s = rng.choice([20, 60, 150])
            box = [x, y, x + s, y + s]
            label = rng.choice(SPECIES[:4])
            truths.append({"label": label, "box": box})
            if rng.random() < 0.8:
                j = rng.randrange(-4, 5)
                dets.append({"label": label if rng.random() < 0.85 else rng.choice(SPECIES[:4]),
                             "score": round(rng.uniform(0.3, 0.99), 3),
                             "box": [box[0] + j, box[1] - j, box[2] + j, box[3]]})
        if rng.random() < 0.3:
            dets.append({"label": rng.choice(SPECIES[:4]), "score": round(rng.uniform(0.05, 0.6), 3),
                         "box": [400, 400, 450, 460]})
        lines.append(json.dumps({"image_id": f"frame_{i:03d}.jpg", "truths": truths, "detections": dets}))
    (ROOT / "interchange.jsonl").write_text("\n".join(lines) + "\n")


def main():
    if ROOT.exists():
        shutil.rmtree(ROOT)
    ROOT.mkdir(parents=True)
    rng = random.Random(20210510)
    expect = drop(rng)
    annotations(rng)
    interchange(rng)
    (ROOT / "serve.json").write_text(json.dumps({
        "db": "demo.db",
        "drop_dir": "data/demo/drop",
        "mock_fixtures": "data/demo/mock",
        "backend": {"workers": 2, "confidence_floor": 0.5},
        "cameras": [{"camera_id": "CAM-01", "width": 1920, "height": 1080, "dpi": 72, "sensitivity": "high"},
                    {"camera_id": "CAM-02", "width": 1280, "height": 720, "dpi": 72, "sensitivity": "medium"}],
        "alerts": [{"rule_id": "jay-watch", "species": "Garrulus glandarius", "min_prob": 0.8,
                    "channel": "log:demo-alerts.jsonl"}],
    }, indent=2) + "\n")
    (ROOT / "expected_counts.json").write_text(json.dumps(expect, indent=2) + "\n")
    print(json.dumps(expect))


if __name__ == "__main__":
    main()
