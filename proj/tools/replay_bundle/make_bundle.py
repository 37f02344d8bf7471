#!/usr/bin/env python3
# Copyright 2026 The promptprobe Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Authors the offline replay bundle: synthetic images, manifest, scripted VLM
answers and scripted detector outputs.

The scripted detections for the pragmatic-ambiguity cells are solved so that
their aggregates land on fixed reference percentages; every other cell gets
plausible level-dependent outcomes from a seeded generator.

Usage: make_bundle.py <bundle_dir>
"""

import json
import math
import random
import sys
from pathlib import Path

from PIL import Image, ImageDraw

W, H = 192, 144
N_TARGETS = 13
LEVELS = ["underdetailed", "standard", "overdetailed", "pragmatic_ambiguity"]
METHODS = ["raw", "key_object_extraction", "semantic_category_grounding"]
BACKENDS = {"groundingdino": "mock-gd", "yoloe": "mock-yoloe"}

# Reference percentages (mIoU, confidence) the pragmatic cells must reproduce.
PRAGMATIC_TARGETS = {
    ("groundingdino", "raw"): (35.84, 44.59),
    ("groundingdino", "key_object_extraction"): (86.82, 86.27),
    ("groundingdino", "semantic_category_grounding"): (90.99, 77.51),
    ("yoloe", "raw"): (9.56, 8.61),
    ("yoloe", "key_object_extraction"): (64.90, 54.57),
    ("yoloe", "semantic_category_grounding"): (65.66, 57.35),
}
# Keeps the solved means clear of rounding boundaries.
TARGET_OFFSET_PCT = 0.001

# (image_id, target_id, box, colour, initial prompts per level, key-object
#  answers per level, category answers per level)
SCENES = [
    ("img01", "mouse", (70, 52, 118, 92), (120, 120, 128),
     ["a mouse",
      "the gray computer mouse on the desk",
      "the matte gray wireless computer mouse with a scroll wheel, resting on the right side "
      "of the wooden desk next to the notebook, cable tucked away",
      "the thing you move around to point and click"],
     ["mouse", "gray computer mouse", "gray wireless computer mouse", "computer mouse"],
     ["mouse", "computer mouse", "mouse", "mouse computer equipment"]),
    ("img02", "mug", (40, 30, 96, 100), (200, 60, 50),
     ["a mug", "the red mug near the window",
      "the glossy red ceramic mug with a chipped handle and a faint coffee ring, standing on "
      "the sill by the left window",
      "what I would grab to warm my hands in the morning"],
     ["mug", "red mug", "red ceramic mug", "mug"],
     ["mug", "mug", "cup", "cup"]),
    ("img03", "scissors", (100, 40, 160, 80), (230, 150, 30),
     ["scissors", "the orange scissors on the table",
      "the pair of orange-handled stainless steel scissors lying open at an angle on the white "
      "table, blades pointing to the top right",
      "the thing that would get this ribbon open"],
     ["scissors", "orange scissors", "orange-handled scissors", "pair of scissors"],
     ["scissors", "scissors", "scissors", "shears"]),
    ("img04", "remote", (30, 60, 110, 84), (40, 40, 45),
     ["a remote", "the black remote on the sofa arm",
      "the slim black infrared remote with rubber buttons and a red power key, balanced on the "
      "left arm of the gray fabric sofa",
      "what I need to change the channel"],
     ["remote", "black remote", "black infrared remote", "television remote"],
     ["remote", "remote control", "remote control", "remote"]),
    ("img05", "book", (60, 20, 130, 120), (40, 90, 170),
     ["a book", "the blue book on the shelf",
      "the thick blue hardcover book with a cracked spine and gold lettering, leaning against "
      "the right end of the middle shelf",
      "something to read on the train"],
     ["book", "blue book", "blue hardcover book", "hardcover book"],
     ["book", "book", "hardback book", "book"]),
    ("img06", "bottle", (120, 20, 150, 120), (60, 170, 90),
     ["a bottle", "the green bottle on the counter",
      "the tall green glass bottle with a silver screw cap and a peeling paper label, standing "
      "at the back corner of the kitchen counter",
      "the thing I would pour from if I were thirsty"],
     ["bottle", "green bottle", "green glass bottle", "drinking bottle"],
     ["bottle", "bottle", "bottle", "water bottle"]),
    ("img07", "laptop", (20, 30, 150, 120), (170, 170, 180),
     ["a laptop", "the silver laptop on the desk",
      "the open silver aluminium laptop with a black keyboard and a sticker on the lid, "
      "placed in the middle of the desk with its screen tilted back",
      "what I would use to answer my email"],
     ["laptop", "silver laptop", "open silver laptop", "laptop computer"],
     ["laptop", "laptop computer", "notebook computer", "laptop"]),
    ("img08", "clock", (130, 10, 180, 60), (240, 240, 235),
     ["a clock", "the round clock on the wall",
      "the round white analog wall clock with black hands and a thin metal rim, hanging "
      "above the door frame on the right",
      "how I can tell if I am late"],
     ["clock", "round clock", "round wall clock", "wall clock"],
     ["clock", "clock", "wall clock", "timepiece"]),
    ("img09", "banana", (50, 70, 140, 110), (240, 210, 60),
     ["a banana", "the yellow banana in the bowl",
      "the ripe yellow banana with a few brown spots and a bent stem, lying across the top of "
      "the fruit bowl on the dining table",
      "a quick snack for later"],
     ["banana", "yellow banana", "ripe yellow banana", "ripe banana"],
     ["banana", "banana", "banana", "banana fruit"]),
    ("img10", "keyboard", (10, 80, 180, 130), (30, 30, 30),
     ["a keyboard", "the black keyboard in front of the monitor",
      "the black full-size mechanical keyboard with white backlighting and a detached wrist "
      "rest, positioned directly in front of the left monitor",
      "what I type on"],
     ["keyboard", "black keyboard", "black mechanical keyboard", "typing keyboard"],
     ["keyboard", "computer keyboard", "keyboard", "computer keyboard"]),
    ("img11", "toothbrush", (80, 10, 100, 120), (80, 200, 220),
     ["a toothbrush", "the blue toothbrush in the cup",
      "the light blue manual toothbrush with soft bristles and a rubber grip, standing upright "
      "in the glass cup beside the sink",
      "the thing I use every night before bed"],
     ["toothbrush", "blue toothbrush", "blue manual toothbrush", "manual toothbrush"],
     ["toothbrush", "toothbrush", "electric toothbrush", "toothbrush"]),
    ("img12", "cup", (20, 40, 80, 110), (250, 250, 250),
     ["a cup", "the white cup on the left",
      "the small white porcelain cup with a thin gold rim and a matching saucer, on the left "
      "side of the breakfast tray",
      "what the tea goes in"],
     ["cup", "white cup", "white porcelain cup", "small cup"],
     ["cup", "cup", "cup", "teacup"]),
    ("img12", "spoon", (110, 50, 170, 66), (190, 190, 200),
     ["a spoon", "the silver spoon on the right",
      "the polished silver teaspoon with an engraved handle, lying diagonally on the right "
      "side of the breakfast tray",
      "what I would stir the tea with"],
     ["spoon", "silver spoon", "silver teaspoon", "teaspoon"],
     ["spoon", "spoon", "spoon", "tea spoon"]),
]

# Level-dependent quality of the scripted outcomes of non-pragmatic texts:
# (probability of a hit, IoU range, score range) per backend.
QUALITY = {
    "groundingdino": {"underdetailed": (0.95, (0.78, 0.98), (0.70, 0.95)),
                      "standard": (0.95, (0.80, 0.98), (0.70, 0.95)),
                      "overdetailed": (0.75, (0.55, 0.95), (0.55, 0.90))},
    "yoloe": {"underdetailed": (0.80, (0.60, 0.95), (0.40, 0.80)),
              "standard": (0.80, (0.60, 0.95), (0.40, 0.80)),
              "overdetailed": (0.80, (0.60, 0.95), (0.45, 0.85))},
}


def normalize(text):
    return " ".join(text.strip().lower().split())


def draw_images(bundle):
    images = bundle / "images"
    images.mkdir(parents=True, exist_ok=True)
    rng = random.Random(7)
    by_image = {}
    for scene in SCENES:
        by_image.setdefault(scene[0], []).append(scene)
    for image_id, scenes in by_image.items():
        base = tuple(rng.randrange(150, 220) for _ in range(3))
        img = Image.new("RGB", (W, H), base)
        d = ImageDraw.Draw(img)
        for _ in range(6):  # clutter
            x, y = rng.randrange(W), rng.randrange(H)
            c = tuple(rng.randrange(60, 240) for _ in range(3))
            d.ellipse([x, y, x + rng.randrange(6, 20), y + rng.randrange(6, 20)], fill=c)
        for _, _, (x1, y1, x2, y2), colour, *_ in scenes:
            # Half-open box -> last covered pixel is x2 - 1.
            d.rounded_rectangle([x1, y1, x2 - 1, y2 - 1], radius=4, fill=colour,
                                outline=tuple(max(0, v - 60) for v in colour))
        img.save(images / f"{image_id}.png", optimize=False)
    return by_image


def write_manifest(bundle, by_image):
    with open(bundle / "manifest.jsonl", "w") as f:
        for image_id, scenes in by_image.items():
            record = {
                "image_id": image_id,
                "image_path": f"images/{image_id}.png",
                "width": W,
                "height": H,
                "targets": [{"target_id": t, "box": list(box), "label_hint": t}
                            for _, t, box, *_ in scenes],
            }
            f.write(json.dumps(record) + "\n")


def write_vlm_fixture(bundle):
    initial, enhance = [], []
    for image_id, target, _, _, prompts, koe, scg in SCENES:
        for li, level in enumerate(LEVELS):
            initial.append({"image_id": image_id, "target_id": target,
                            "detail_level": level, "text": prompts[li]})
            enhance.append({"method": "key_object_extraction", "image_id": image_id,
                            "input_text": prompts[li], "text": koe[li]})
            enhance.append({"method": "semantic_category_grounding", "image_id": image_id,
                            "input_text": prompts[li], "text": scg[li]})
    with open(bundle / "vlm_fixture.json", "w") as f:
        json.dump({"initial": initial, "enhance": enhance}, f, indent=1)
        f.write("\n")


def cell_text(scene, level, method):
    li = LEVELS.index(level)
    return normalize({"raw": scene[4], "key_object_extraction": scene[5],
                      "semantic_category_grounding": scene[6]}[method][li])


def solve_cell(rng, miou_pct, conf_pct):
    """Per-target (iou, score) pairs, None meaning no overlapping detection,
    whose zero-filled means equal the requested percentages."""
    total_iou = N_TARGETS * (miou_pct + TARGET_OFFSET_PCT) / 100.0
    total_conf = N_TARGETS * (conf_pct + TARGET_OFFSET_PCT) / 100.0
    lo_i, hi_i, lo_c, hi_c = 0.30, 0.98, 0.30, 0.95
    ks = [k for k in range(1, N_TARGETS + 1)
          if lo_i * k < total_iou < hi_i * k and lo_c * k < total_conf < hi_c * k]
    for _ in range(100000):
        k = rng.choice(ks)
        ious = [rng.uniform(max(lo_i, total_iou / k - 0.25), min(hi_i, total_iou / k + 0.25))
                for _ in range(k - 1)]
        confs = [rng.uniform(max(lo_c, total_conf / k - 0.25), min(hi_c, total_conf / k + 0.25))
                 for _ in range(k - 1)]
        ious = [round(v, 4) for v in ious]
        confs = [round(v, 4) for v in confs]
        last_i = total_iou - sum(ious)
        last_c = total_conf - sum(confs)
        if lo_i <= last_i <= hi_i and lo_c <= last_c <= hi_c:
            pairs = list(zip(ious + [last_i], confs + [last_c]))
            slots = rng.sample(range(N_TARGETS), k)
            out = [None] * N_TARGETS
            for slot, pair in zip(slots, pairs):
                out[slot] = pair
            return out
    raise RuntimeError(f"cannot solve cell {miou_pct}/{conf_pct}")


def detection_entry(backend, box, score, rng, phrase):
    entry = {"box": box, "phrase": phrase}
    if backend == "groundingdino":
        logit = math.log(score / (1.0 - score))
        others = [round(logit - rng.uniform(0.5, 3.0), 3) for _ in range(rng.randrange(1, 4))]
        logits = others + [logit]
        rng.shuffle(logits)
        entry["token_logits"] = logits
    else:
        objectness = (1.0 + score) / 2.0
        entry["objectness"] = objectness
        entry["class_prob"] = score / objectness
    return entry


def outcome_detections(backend, scene, outcome, rng, phrase):
    """Scripted detections realising `outcome` for the scene's target."""
    x1, y1, x2, y2 = scene[2]
    dets = []
    if outcome is not None:
        iou, score = outcome
        # Same height, a fraction of the width, anchored at the left edge:
        # intersection = prediction area, so IoU equals the width ratio.
        dets.append(detection_entry(backend, [x1, y1, x1 + iou * (x2 - x1), y2], score, rng,
                                    phrase))
    if outcome is None or rng.random() < 0.4:
        # A distractor clear of every target in the image.
        dets.append(detection_entry(backend, [2, 2, 14, 12], rng.uniform(0.3, 0.6), rng,
                                    phrase))
    return dets


def write_detector_fixtures(bundle):
    fixtures = bundle / "fixtures"
    fixtures.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20250807)
    for backend, scenario in BACKENDS.items():
        # (image_id, normalized text) -> (scene, outcome)
        assigned = {}
        for method in METHODS:
            m, c = PRAGMATIC_TARGETS[(backend, method)]
            for scene, outcome in zip(SCENES, solve_cell(rng, m, c)):
                key = (scene[0], cell_text(scene, "pragmatic_ambiguity", method))
                assert key not in assigned, f"pragmatic texts must be distinct: {key}"
                assigned[key] = (scene, outcome)
        for level in LEVELS[:3]:
            p_hit, (ilo, ihi), (slo, shi) = QUALITY[backend][level]
            for scene in SCENES:
                for method in METHODS:
                    key = (scene[0], cell_text(scene, level, method))
                    if key in assigned:
                        continue
                    hit = rng.random() < p_hit
                    outcome = (round(rng.uniform(ilo, ihi), 4),
                               round(rng.uniform(slo, shi), 4)) if hit else None
                    assigned[key] = (scene, outcome)
        rules = []
        for (image_id, text), (scene, outcome) in assigned.items():
            rules.append({"prompt_substring": text, "image_id": image_id,
                          "detections": outcome_detections(backend, scene, outcome, rng, text)})
        # Longest first, so that no rule text shadows a longer prompt containing it.
        rules.sort(key=lambda r: (-len(r["prompt_substring"]), r["image_id"],
                                  r["prompt_substring"]))
        with open(fixtures / f"{scenario}.json", "w") as f:
            json.dump(rules, f, indent=1)
            f.write("\n")


def write_configs(bundle):
    base = {
        "schema_version": 1,
        "manifest": "manifest.jsonl",
        "prompt_levels": LEVELS,
        "enhancement_methods": METHODS,
        "backends": [
            {"backend_id": b, "kind": "mock", "score_threshold": 0.25,
             "params": {"fixture_dir": "fixtures", "scenario": s}}
            for b, s in BACKENDS.items()
        ],
        "vlm": {"endpoint": "fixture:vlm_fixture.json", "model_id": "gpt-5-2025-08-07",
                "decoding": {"temperature": 0}},
        "overlay_style": {"border_color": [255, 0, 0], "border_width": 3},
        "metrics": {"match_criterion": "largest_intersection", "confidence_mode": "zero_fill"},
        "seed": 0,
        "workers": 4,
    }
    replay = dict(base, mode="replay", replay_store="cache", output_dir="out")
    record = dict(base, mode="cached", cache_dir="cache", output_dir="out-record")
    for name, doc in (("config.replay.json", replay), ("config.record.json", record)):
        with open(bundle / name, "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")


def main():
    bundle = Path(sys.argv[1] if len(sys.argv) > 1 else "data/replay_bundle")
    bundle.mkdir(parents=True, exist_ok=True)
    by_image = draw_images(bundle)
    assert sum(len(v) for v in by_image.values()) == N_TARGETS
    write_manifest(bundle, by_image)
    write_vlm_fixture(bundle)
    write_detector_fixtures(bundle)
    write_configs(bundle)


if __name__ == "__main__":
    main()
