"""One-off generator for the shipped sample catalog (data/catalog.json).

Kept in tools/ so the fixture can be regenerated consistently if the
schema evolves; the emitted JSON is the authoritative shipped artifact.
"""

import json
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "sceneforge" / "data" / "catalog.json"

TAXONOMY = {
    "furniture": "thing",
    "seating": "furniture",
    "chair": "seating",
    "office_chair": "chair",
    "couch": "seating",
    "stool": "seating",
    "bench": "seating",
    "table": "furniture",
    "coffee_table": "table",
    "dining_table": "table",
    "desk": "table",
    "round_table": "table",
    "nightstand": "furniture",
    "counter": "furniture",
    "bed": "furniture",
    "storage": "furniture",
    "bookcase": "storage",
    "dresser": "storage",
    "cabinet": "storage",
    "lighting": "thing",
    "lamp": "lighting",
    "desk_lamp": "lamp",
    "floor_lamp": "lamp",
    "electronics": "thing",
    "television": "electronics",
    "computer": "electronics",
    "laptop": "computer",
    "monitor": "electronics",
    "keyboard": "electronics",
    "mouse": "electronics",
    "tableware": "thing",
    "plate": "tableware",
    "bowl": "tableware",
    "cup": "tableware",
    "glass": "tableware",
    "teapot": "tableware",
    "food": "thing",
    "sandwich": "food",
    "cake": "food",
    "apple": "food",
    "decor": "thing",
    "poster": "decor",
    "painting": "decor",
    "mirror": "decor",
    "clock": "decor",
    "rug": "decor",
    "plant": "decor",
    "pillow": "decor",
    "vase": "decor",
    "book": "thing",
    "appliance": "thing",
    "refrigerator": "appliance",
    "stove": "appliance",
    "microwave": "appliance",
    "sink": "appliance",
    "toaster": "appliance",
    "kettle": "appliance",
    "room": "thing",
}


def top_surface(hx, hy, hz, facing="exterior"):
    return {
        "normalClass": "up",
        "facing": facing,
        "rect": {"center": [0, 0, hz], "axes": [[hx, 0, 0], [0, hy, 0]]},
    }


def room_surfaces(hx, hy, hz):
    return [
        # floor
        {"normalClass": "up", "facing": "interior",
         "rect": {"center": [0, 0, -hz], "axes": [[hx, 0, 0], [0, hy, 0]]}},
        # walls; axes ordered so cross(u, v) points into the room
        {"normalClass": "horizontal", "facing": "interior",
         "rect": {"center": [-hx, 0, 0], "axes": [[0, hy, 0], [0, 0, hz]]}},
        {"normalClass": "horizontal", "facing": "interior",
         "rect": {"center": [hx, 0, 0], "axes": [[0, 0, hz], [0, hy, 0]]}},
        {"normalClass": "horizontal", "facing": "interior",
         "rect": {"center": [0, -hy, 0], "axes": [[0, 0, hz], [hx, 0, 0]]}},
        {"normalClass": "horizontal", "facing": "interior",
         "rect": {"center": [0, hy, 0], "axes": [[hx, 0, 0], [0, 0, hz]]}},
        # ceiling
        {"normalClass": "down", "facing": "interior",
         "rect": {"center": [0, 0, hz], "axes": [[0, hy, 0], [hx, 0, 0]]}},
    ]


def m(mid, cat, he, tags=(), attrs=(), surfaces=None, side=None):
    entry = {
        "id": mid,
        "category": cat,
        "tags": list(tags),
        "attributes": [{"kind": k, "value": v} for k, v in attrs],
        "halfExtents": list(he),
    }
    if surfaces:
        entry["supportSurfaces"] = surfaces
    if side:
        entry["attachmentSide"] = side
    return entry


CHAIR_VARIANTS = [
    ("chair_01", [("color", "red"), ("material", "wood")], ["classic"]),
    ("chair_02", [("color", "blue"), ("material", "wood")], ["classic"]),
    ("chair_03", [("color", "green"), ("material", "plastic")], ["modern"]),
    ("chair_04", [("color", "black"), ("material", "metal")], ["modern"]),
    ("chair_05", [("color", "white"), ("material", "plastic")], ["modern"]),
    ("chair_06", [("color", "brown"), ("material", "wood")], ["rustic"]),
    ("chair_07", [("color", "yellow"), ("material", "plastic")], []),
    ("chair_08", [("color", "gray"), ("material", "metal")], []),
    ("chair_09", [("color", "black"), ("material", "leather")], ["padded"]),
    ("chair_10", [("color", "brown"), ("material", "leather")], ["padded"]),
    ("chair_11", [("color", "white"), ("material", "wood")], []),
    ("chair_12", [("color", "purple"), ("material", "fabric")], ["padded"]),
]

MODELS = [
    m("room_basic", "room", [3.0, 2.5, 1.35], ["indoor"], [], room_surfaces(3.0, 2.5, 1.35)),
    m("room_large", "room", [4.0, 3.0, 1.4], ["indoor", "spacious"], [], room_surfaces(4.0, 3.0, 1.4)),
    m("table_01", "table", [0.8, 0.5, 0.37], ["wooden"], [("material", "wood")],
      [top_surface(0.8, 0.5, 0.37)]),
    m("table_02", "table", [0.75, 0.45, 0.36], ["modern"], [("material", "metal"), ("color", "black")],
      [top_surface(0.75, 0.45, 0.36)]),
    m("round_table_01", "round_table", [0.6, 0.6, 0.37], ["round"], [("shape", "round"), ("material", "wood")],
      [top_surface(0.6, 0.6, 0.37)]),
    m("dining_table_01", "dining_table", [1.0, 0.6, 0.38], ["wooden", "large"], [("material", "wood")],
      [top_surface(1.0, 0.6, 0.38)]),
    m("coffee_table_01", "coffee_table", [0.6, 0.4, 0.22], ["low"], [("material", "wood")],
      [top_surface(0.6, 0.4, 0.22)]),
    m("coffee_table_02", "coffee_table", [0.55, 0.35, 0.2], ["low", "glass"], [("material", "glass")],
      [top_surface(0.55, 0.35, 0.2)]),
    m("desk_01", "desk", [0.75, 0.4, 0.37], ["office"], [("material", "wood")],
      [top_surface(0.75, 0.4, 0.37)]),
    m("desk_02", "desk", [0.7, 0.35, 0.36], ["office", "modern"], [("material", "metal"), ("color", "white")],
      [top_surface(0.7, 0.35, 0.36)]),
    m("nightstand_01", "nightstand", [0.25, 0.2, 0.28], ["bedside"], [("material", "wood")],
      [top_surface(0.25, 0.2, 0.28)]),
    m("counter_01", "counter", [1.2, 0.35, 0.45], ["kitchen"], [("material", "wood")],
      [top_surface(1.2, 0.35, 0.45)]),
    *[m(mid, "chair", [0.25, 0.25, 0.45], tags, attrs) for mid, attrs, tags in CHAIR_VARIANTS],
    m("office_chair_01", "office_chair", [0.3, 0.3, 0.5], ["office", "wheeled"],
      [("color", "black"), ("material", "leather")]),
    m("couch_01", "couch", [1.1, 0.45, 0.4], ["comfy"], [("color", "gray"), ("material", "fabric")]),
    m("couch_02", "couch", [1.0, 0.42, 0.38], ["comfy"], [("color", "brown"), ("material", "leather")]),
    m("stool_01", "stool", [0.2, 0.2, 0.3], [], [("material", "wood")]),
    m("bench_01", "bench", [0.8, 0.2, 0.25], [], [("material", "wood")]),
    m("bed_01", "bed", [1.0, 0.95, 0.3], ["double"], [("color", "white")],
      [top_surface(1.0, 0.95, 0.3)]),
    m("bed_02", "bed", [0.8, 0.95, 0.28], ["single"], [("color", "blue")],
      [top_surface(0.8, 0.95, 0.28)]),
    m("bookcase_01", "bookcase", [0.4, 0.15, 0.9], ["tall"], [("material", "wood")],
      [
          {"normalClass": "up", "facing": "interior",
           "rect": {"center": [0, 0, -0.3], "axes": [[0.38, 0, 0], [0, 0.13, 0]]}},
          {"normalClass": "up", "facing": "interior",
           "rect": {"center": [0, 0, 0.1], "axes": [[0.38, 0, 0], [0, 0.13, 0]]}},
          top_surface(0.4, 0.15, 0.9),
      ]),
    m("dresser_01", "dresser", [0.5, 0.25, 0.4], [], [("material", "wood")],
      [top_surface(0.5, 0.25, 0.4)]),
    m("cabinet_01", "cabinet", [0.4, 0.2, 0.5], [], [("material", "wood")],
      [top_surface(0.4, 0.2, 0.5)]),
    m("lamp_01", "lamp", [0.12, 0.12, 0.22], ["bedside"], [("color", "red")]),
    m("lamp_02", "lamp", [0.12, 0.12, 0.23], ["bedside"], [("color", "blue")]),
    m("desk_lamp_01", "desk_lamp", [0.1, 0.1, 0.2], ["office"], [("color", "black"), ("material", "metal")]),
    m("floor_lamp_01", "floor_lamp", [0.15, 0.15, 0.8], ["tall"], [("color", "black")]),
    m("television_01", "television", [0.5, 0.05, 0.3], ["flatscreen"], [("color", "black")]),
    m("monitor_01", "monitor", [0.3, 0.04, 0.2], ["office"], [("color", "black")]),
    m("computer_01", "computer", [0.1, 0.22, 0.22], ["office", "tower"], [("color", "black")]),
    m("laptop_01", "laptop", [0.17, 0.12, 0.012], ["portable"], [("color", "gray")]),
    m("keyboard_01", "keyboard", [0.22, 0.08, 0.015], ["office"], [("color", "black")]),
    m("mouse_01", "mouse", [0.03, 0.05, 0.02], ["office"], [("color", "black")]),
    m("plate_01", "plate", [0.12, 0.12, 0.015], [], [("color", "white")]),
    m("plate_02", "plate", [0.1, 0.1, 0.013], [], [("color", "blue")]),
    m("bowl_01", "bowl", [0.08, 0.08, 0.04], [], [("color", "white")]),
    m("cup_01", "cup", [0.04, 0.04, 0.045], [], [("color", "white")]),
    m("glass_01", "glass", [0.03, 0.03, 0.055], [], [("material", "glass")]),
    m("teapot_01", "teapot", [0.09, 0.06, 0.07], [], [("color", "white")]),
    m("vase_01", "vase", [0.07, 0.07, 0.14], ["flower"], [("color", "white")]),
    m("vase_02", "vase", [0.06, 0.06, 0.13], ["flower"], [("color", "red")]),
    m("sandwich_01", "sandwich", [0.07, 0.05, 0.025], [], []),
    m("cake_01", "cake", [0.1, 0.1, 0.05], [], [("color", "brown")]),
    m("apple_01", "apple", [0.035, 0.035, 0.035], [], [("color", "red")]),
    m("poster_01", "poster", [0.3, 0.01, 0.45], ["art"], [], None, "back"),
    m("painting_01", "painting", [0.25, 0.015, 0.3], ["art"], [], None, "back"),
    m("mirror_01", "mirror", [0.2, 0.01, 0.35], [], [], None, "back"),
    m("clock_01", "clock", [0.12, 0.03, 0.12], [], [("shape", "round")], None, "back"),
    m("rug_01", "rug", [1.0, 0.75, 0.01], ["soft"], [("color", "red")], None, "bottom"),
    m("rug_02", "rug", [0.8, 0.6, 0.01], ["soft"], [("color", "blue")], None, "bottom"),
    m("plant_01", "plant", [0.15, 0.15, 0.3], ["potted"], [("color", "green")]),
    m("pillow_01", "pillow", [0.2, 0.15, 0.07], ["soft"], [("color", "white")]),
    m("book_01", "book", [0.1, 0.07, 0.012], [], [("color", "red")]),
    m("book_02", "book", [0.11, 0.08, 0.015], [], [("color", "blue")]),
    m("refrigerator_01", "refrigerator", [0.35, 0.3, 0.85], ["kitchen"], [("color", "white")]),
    m("stove_01", "stove", [0.3, 0.3, 0.45], ["kitchen"], [("color", "white")],
      [top_surface(0.3, 0.3, 0.45)]),
    m("microwave_01", "microwave", [0.25, 0.18, 0.15], ["kitchen"], [("color", "black")]),
    m("sink_01", "sink", [0.3, 0.25, 0.2], ["kitchen"], []),
    m("toaster_01", "toaster", [0.12, 0.09, 0.1], ["kitchen"], [("color", "gray")]),
    m("kettle_01", "kettle", [0.09, 0.08, 0.1], ["kitchen"], [("color", "black")]),
]


def main():
    OUT.parent.mkdir(parents=True, exist_ok=True)
    doc = {"taxonomyRoot": "thing", "taxonomy": TAXONOMY, "models": MODELS}
    OUT.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {OUT} ({len(MODELS)} models)")


if __name__ == "__main__":
    main()
