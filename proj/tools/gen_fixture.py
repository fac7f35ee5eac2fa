#!/usr/bin/env python3
"""Writes the bundled synthetic news corpus (fictional places and people).

Output is fully determined by SEED; rerunning reproduces the committed file.
"""
import argparse
import datetime as dt
import json
import random

SEED = 20240611
START = dt.datetime(2023, 3, 1, 6, 0, tzinfo=dt.timezone.utc)
SPAN_DAYS = 90
SOURCES = ["Harbor Ledger", "Veloria Times", "Northern Wire", "Civic Post"]

TOPICS = [
    {
        "key": "port",
        "count": 30,
        "people": ["Ilse Varga", "Marek Tollan", "Dockworkers Guild"],
        "place": "Castamar",
        "arc": [
            ("Dockworkers in Castamar walk out over pay", ["strike", "wages", "dockworkers", "walkout", "cranes"]),
            ("Castamar port strike enters second week", ["strike", "cargo", "backlog", "ships", "dockworkers"]),
            ("Shipping backlog grows as Castamar strike drags on", ["backlog", "containers", "shortages", "cargo", "strike"]),
            ("Talks resume between Dockworkers Guild and port authority", ["negotiations", "mediation", "wages", "agreement", "strike"]),
            ("Castamar dockworkers approve new contract", ["contract", "agreement", "wages", "vote", "dockworkers"]),
        ],
        "vocab": ["harbor", "terminal", "freight", "union", "pickets", "berths", "pay", "shifts"],
    },
    {
        "key": "drought",
        "count": 27,
        "people": ["Anselm Rook", "Nerith Water Board"],
        "place": "Nerith",
        "arc": [
            ("Reservoirs in Nerith fall to record lows", ["drought", "reservoirs", "rainfall", "water", "farmers"]),
            ("Nerith Water Board announces rationing", ["rationing", "water", "restrictions", "households", "drought"]),
            ("Farmers in Nerith valley report failing harvests", ["harvest", "crops", "farmers", "irrigation", "drought"]),
            ("Emergency pipeline plan approved for Nerith", ["pipeline", "funding", "water", "emergency", "engineers"]),
            ("Rains return to Nerith but rationing stays", ["rainfall", "reservoirs", "rationing", "recovery", "water"]),
        ],
        "vocab": ["valley", "wells", "aquifer", "canals", "livestock", "orchards", "supply", "heat"],
    },
    {
        "key": "election",
        "count": 31,
        "people": ["Tomas Arlen", "Petra Holm", "Civic Union"],
        "place": "Veloria",
        "arc": [
            ("Petra Holm launches campaign for Veloria presidency", ["campaign", "election", "candidate", "voters", "rally"]),
            ("Tomas Arlen and Petra Holm clash in first debate", ["debate", "election", "taxes", "candidate", "voters"]),
            ("Polls tighten ahead of Veloria election", ["polls", "election", "voters", "turnout", "campaign"]),
            ("Veloria votes in closely watched election", ["ballots", "turnout", "election", "polling", "voters"]),
            ("Petra Holm sworn in as president of Veloria", ["inauguration", "president", "cabinet", "election", "oath"]),
        ],
        "vocab": ["parliament", "districts", "pledges", "volunteers", "manifesto", "coalition", "speech", "reform"],
    },
    {
        "key": "robotics",
        "count": 24,
        "people": ["Solvane Robotics", "Lena Ostrova"],
        "place": "Brisk",
        "arc": [
            ("Solvane Robotics unveils plan for Brisk factory", ["factory", "robots", "investment", "jobs", "automation"]),
            ("Brisk council debates Solvane Robotics factory permit", ["permit", "council", "factory", "zoning", "jobs"]),
            ("Solvane Robotics breaks ground in Brisk", ["construction", "factory", "robots", "investment", "engineers"]),
            ("Solvane Robotics faces scrutiny over subsidies", ["subsidies", "audit", "investment", "factory", "scrutiny"]),
        ],
        "vocab": ["assembly", "sensors", "startup", "shareholders", "prototype", "software", "hiring", "machines"],
    },
    {
        "key": "flood",
        "count": 23,
        "people": ["Orvik Rescue Service", "Dana Pell"],
        "place": "Orvik",
        "arc": [
            ("Floodwaters sweep through Orvik after storm", ["flood", "storm", "evacuation", "rescue", "rivers"]),
            ("Orvik bridge collapses as river keeps rising", ["bridge", "collapse", "flood", "river", "rescue"]),
            ("Displaced Orvik families wait in shelters", ["shelters", "displaced", "families", "aid", "flood"]),
            ("Reconstruction of Orvik bridge begins", ["reconstruction", "bridge", "engineers", "funding", "repairs"]),
        ],
        "vocab": ["levees", "sandbags", "volunteers", "mud", "roads", "damage", "boats", "rainfall"],
    },
    {
        "key": "trade",
        "count": 25,
        "people": ["Kestrel Republic", "Ivo Marant", "Helga Sund"],
        "place": "Kestrel",
        "arc": [
            ("Veloria and Kestrel Republic open trade talks", ["trade", "tariffs", "negotiations", "exports", "ministers"]),
            ("Tariff dispute stalls Kestrel trade talks", ["tariffs", "dispute", "trade", "steel", "exports"]),
            ("Kestrel Republic signals compromise on steel tariffs", ["compromise", "tariffs", "steel", "trade", "ministers"]),
            ("Trade pact signed between Veloria and Kestrel Republic", ["pact", "trade", "signing", "tariffs", "exports"]),
        ],
        "vocab": ["imports", "quotas", "customs", "delegation", "summit", "markets", "grain", "diplomats"],
    },
]

FILLER = [
    "officials said", "according to residents", "the report noted", "observers expect",
    "local media reported", "analysts warned", "a spokesperson confirmed", "critics argued",
]
GENERIC = ["week", "morning", "statement", "plans", "public", "city", "region", "officials",
           "concerns", "questions", "update", "meeting", "issue", "response", "support"]


def sentence(rng, words, length):
    picked = [rng.choice(words) for _ in range(length)]
    return " ".join(picked)


def body_for(rng, topic, stage_words):
    person = rng.choice(topic["people"])
    place = topic["place"]
    pool = stage_words * 3 + topic["vocab"] + GENERIC
    parts = [
        f"{person} spoke in {place} on Tuesday as {sentence(rng, pool, 6)} continued.",
        f"The {sentence(rng, pool, 5)} drew attention, {rng.choice(FILLER)}.",
        f"Residents described {sentence(rng, pool, 7)} across the area.",
        f"{rng.choice(topic['people'])} said the {sentence(rng, pool, 4)} would shape the coming weeks.",
        f"Further {sentence(rng, pool, 6)} is expected, {rng.choice(FILLER)}.",
    ]
    return " ".join(parts)


def generate():
    rng = random.Random(SEED)
    docs = []
    for topic in TOPICS:
        n = topic["count"]
        stages = len(topic["arc"])
        offsets = sorted(rng.uniform(0, SPAN_DAYS) for _ in range(n))
        for k, off in enumerate(offsets):
            stage = min(stages - 1, k * stages // n)
            headline, words = topic["arc"][stage]
            if k % stages != 0:
                headline = f"{headline}: {rng.choice(words)} {rng.choice(topic['vocab'])} in focus"
            ts = START + dt.timedelta(days=off)
            ts = ts.replace(microsecond=0)
            docs.append({
                "id": f"{topic['key']}-{k + 1:02d}",
                "timestamp": ts.strftime("%Y-%m-%dT%H:%M:%SZ"),
                "headline": headline,
                "body": body_for(rng, topic, words),
                "source": rng.choice(SOURCES),
            })
    docs.sort(key=lambda d: (d["timestamp"], d["id"]))
    return docs


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output", default="tests/fixtures/news160.jsonl")
    args = parser.parse_args()
    docs = generate()
    assert len(docs) == 160
    with open(args.output, "w", encoding="utf-8", newline="\n") as out:
        for d in docs:
            out.write(json.dumps(d, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
