"""Writes the checked-in golden N-Triples files. Run once; outputs are committed."""
import random
from pathlib import Path

HERE = Path(__file__).parent
E = "http://example.org/e/"
P = "http://example.org/p/"
X = "http://other.org/x/"


def golden_200(rng):
    entities = [f"<{E}n{i}>" for i in range(40)]
    blanks = [f"_:b{i}" for i in range(4)]
    preds = [f"<{P}rel{i}>" for i in range(6)]
    lines, facts = [], []

    def fact():
        s = rng.choice(entities[:25] + blanks)
        o = rng.choice(entities + blanks[:2])
        return f"{s} {rng.choice(preds)} {o} ."

    kinds = ["fact"] * 120 + ["literal"] * 24 + ["external"] * 20 + ["malformed"] * 12 + ["dup"] * 14 + ["blank"] * 6 + ["comment"] * 4
    rng.shuffle(kinds)
    malformed = [
        f"<{E}n1> <{P}rel0> <{E}n2>",
        f"<{E}n1> <{P}rel0> .",
        f"<{E}n1 <{P}rel0> <{E}n2> .",
        f"\"lit\" <{P}rel0> <{E}n2> .",
        f"<{E}n1> <{P}rel0> <{E}n2> <{E}n3> .",
        f"<{E}n1><{P}rel0> <{E}n2> .",
        f"<{E}n1> <{P}rel0> \"unterminated .",
        f"<{E}n1> _:b0 <{E}n2> .",
    ]
    for kind in kinds:
        if kind == "fact" or (kind == "dup" and not facts):
            line = fact()
            facts.append(line)
        elif kind == "dup":
            line = rng.choice(facts)
        elif kind == "literal":
            tail = rng.choice(['"x"', '"3"^^<http://www.w3.org/2001/XMLSchema#integer>', '"chat"@fr', '"a \\" b"'])
            line = f"{rng.choice(entities)} {rng.choice(preds)} {tail} ."
        elif kind == "external":
            if rng.random() < 0.5:
                line = f"{rng.choice(entities)} {rng.choice(preds)} <{X}{rng.randrange(9)}> ."
            else:
                line = f"<{X}{rng.randrange(9)}> {rng.choice(preds)} {rng.choice(entities)} ."
        elif kind == "malformed":
            line = rng.choice(malformed)
        elif kind == "blank":
            line = ""
        else:
            line = "# comment line"
        lines.append(line)
    assert len(lines) == 200
    return lines


def golden_10():
    return [
        "<p:alice> <p:knows> <p:bob> .",
        "<p:alice> <p:knows> <p:carol> .",
        "<p:bob> <p:knows> <p:carol> .",
        "<p:dave> <p:knows> <p:alice> .",
        "<p:alice> <p:worksFor> <p:acme> .",
        "<p:bob> <p:worksFor> <p:acme> .",
        "<p:carol> <p:worksFor> <p:initech> .",
        "<p:alice> <p:name> \"Alice\" .",
        "<p:bob> <p:sameAs> <http://dbpedia.org/resource/Bob> .",
        "<p:carol> <p:knows> <p:dave>",
    ]


def main():
    rng = random.Random(7)
    (HERE / "golden_200.nt").write_text("\n".join(golden_200(rng)) + "\n")
    (HERE / "golden_10.nt").write_text("\n".join(golden_10()) + "\n")


if __name__ == "__main__":
    main()
