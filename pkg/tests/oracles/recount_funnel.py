"""Independent recount of the fixture funnel.

Shares no code with the package: cells are split with a regex, parses are
walked directly from the JSON, and verb forms are looked up in a table written
out by hand for the fixture sentences. The printed JSON is what the golden
funnel file freezes.
"""

import json
import re
import sys
from pathlib import Path

from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

VERB_LEMMA = {
    "includes": "include", "included": "include", "schedules": "schedule", "verifies": "verify",
    "stores": "store", "contains": "contain", "encodes": "encode", "modifies": "modify",
    "counts": "count", "sends": "send", "defines": "define", "=": "=", "re-establishes": "reestablish",
    "applies": "apply",
}
CATALOG = {"decode", "encode", "verify", "access", "reestablish", "count", "build", "complete", "append",
           "belong", "store", "contain", "include", "combine", "imply", "establish", "modify", "denote",
           "utilize", "set", "change", "define", "="}
PUNCT = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~"


def lexicon(tables_path, exclude_path):
    excluded = {w.strip().lower() for w in exclude_path.read_text().split() if w.strip()}
    blocked = {w.lower() for w in ENGLISH_STOP_WORDS} | excluded
    terms = set()
    n_tables = 0
    for line in tables_path.read_text().splitlines():
        n_tables += 1
        for row in json.loads(line)["rows"]:
            for cell in row:
                for tok in re.findall(r"\S+", cell):
                    tok = tok.strip(PUNCT)
                    if tok and tok.lower() not in blocked:
                        terms.add(tok)
    return n_tables, terms


def triples(parses_path):
    out = []
    for line in parses_path.read_text().splitlines():
        p = json.loads(line)
        kids = {}
        for head, dep, rel in p["dep_edges"]:
            kids.setdefault((head, rel), []).append(dep)
        for v in range(len(p["tokens"])):
            for s in kids.get((v, "nsubj"), []):
                for o in kids.get((v, "obj"), []) + kids.get((v, "dobj"), []):
                    out.append((p["sentence_id"], p["tokens"][s], p["tokens"][v], p["tokens"][o], len(p["tokens"])))
    return out


def recount(fixtures=FIXTURES):
    n_tables, terms = lexicon(fixtures / "tables.jsonl", fixtures / "domain_exclude.txt")
    raw = triples(fixtures / "parses.jsonl")
    by_lex = [t for t in raw if t[1] in terms and t[3] in terms]
    by_pred = [t for t in by_lex if VERB_LEMMA[t[2]] in CATALOG]
    # the dataset appends "[SEP] source relation target" to every sentence
    by_len = [t for t in by_pred if t[4] + 4 <= 200]
    return {
        "tables": n_tables,
        "terms": len(terms),
        "raw_groups": len(raw),
        "lexicon_filtered": len(by_lex),
        "predicate_filtered": len(by_pred),
        "length_filtered": len(by_len),
        "kept": [[sid, s, VERB_LEMMA[v], o] for sid, s, v, o, _ in by_len],
    }


if __name__ == "__main__":
    json.dump(recount(Path(sys.argv[1]) if len(sys.argv) > 1 else FIXTURES), sys.stdout, indent=1)
    print()
