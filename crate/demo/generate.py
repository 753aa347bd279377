"""Regenerates the synthetic demo corpus in demo/corpus.

Twenty constitutions drawn from five planted topics. Each constitution after the first
inherits most of its topic mixture from a randomly chosen earlier one, so the inferred
network has real structure to find. Output is fully determined by SEED.
"""

import csv
import random
from pathlib import Path

SEED = 1789
N_CONSTITUTIONS = 20
TOKENS = 1000
INHERIT = 0.5

TOPICS = {
    "rights": "liberty speech press assembly religion conscience privacy petition equality "
    "dignity habeas torture slavery property asylum expression movement "
    "association worship correspondence",
    "legislature": "parliament senate chamber deputies legislature quorum bill statute session "
    "bicameral vote ballot representative electorate constituency "
    "speaker caucus adjournment veto budget",
    "executive": "president cabinet minister premier monarch crown governor decree "
    "commander army navy treaty ambassador pardon succession regent throne "
    "emergency martial envoy",
    "judiciary": "court judge tribunal justice jury appeal verdict magistrate prosecutor "
    "attorney lawsuit sentence acquittal testimony witness evidence bail "
    "warrant docket",
    "economy": "tax revenue treasury currency bank tariff commerce trade labour wage "
    "factory harvest railway mineral pension insurance cooperative "
    "enterprise industry",
}

COUNTRIES = [
    "Arvenia", "Belmora", "Calvane", "Dorvik", "Estoria", "Falkmar", "Gelvia", "Hesparo",
    "Istrel", "Jorvand", "Kaltra", "Lumeria", "Morvane", "Norsk Vale", "Ostrava Nova",
    "Pelagia", "Quiraz", "Rovenna", "Sylvar", "Tervona",
]


def dirichlet(rng, alpha, k):
    draws = [rng.gammavariate(alpha, 1.0) for _ in range(k)]
    total = sum(draws)
    return [d / total for d in draws]


def main():
    rng = random.Random(SEED)
    out = Path(__file__).resolve().parent / "corpus"
    out.mkdir(exist_ok=True)
    vocab = [words.split() for words in TOPICS.values()]
    k = len(vocab)
    years = sorted(rng.sample(range(1789, 2011), N_CONSTITUTIONS))
    mixtures = []
    rows = []
    for i, (country, year) in enumerate(zip(COUNTRIES, years)):
        fresh = dirichlet(rng, 0.2, k)
        if mixtures:
            parent = mixtures[rng.randrange(len(mixtures))]
            mix = [INHERIT * p + (1 - INHERIT) * f for p, f in zip(parent, fresh)]
        else:
            mix = fresh
        mixtures.append(mix)
        words = []
        for _ in range(TOKENS):
            topic = rng.choices(range(k), weights=mix)[0]
            words.append(rng.choice(vocab[topic]))
        lines = [" ".join(words[j : j + 20]) + "." for j in range(0, len(words), 20)]
        cid = f"{country.lower().replace(' ', '_')}_{year}"
        filename = f"{cid}.txt"
        (out / filename).write_text("\n".join(lines) + "\n", encoding="utf-8")
        rows.append({"id": cid, "country": country, "year": year, "filename": filename})
    with open(Path(__file__).resolve().parent / "manifest.csv", "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=["id", "country", "year", "filename"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)


if __name__ == "__main__":
    main()
