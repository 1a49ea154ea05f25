"""Regenerate tests/data/porter_golden.tsv.

The vocabulary is harvested from English prose (docstrings and comments) found
in installed Python packages, then stemmed with NLTK's PorterStemmer in
MARTIN_EXTENSIONS mode, which reproduces Martin Porter's reference
implementation and its published voc.txt/output.txt pairs.

    python3 porter_golden.py /usr/lib/python3.10:/usr/local/lib/python3.10/dist-packages > ../data/porter_golden.tsv
"""
import os
import re
import sys

from nltk.stem.porter import PorterStemmer

WORD = re.compile(r"\b[a-z]{1,20}\b")

# Classic vectors from the algorithm description; always included.
SEED = """caresses ponies ties caress cats feed agreed plastered bled motoring
sing conflated troubled sized hopping tanned falling hissing fizzed failing
filing happy sky relational conditional rational valenci hesitanci digitizer
conformabli radicalli differentli vileli analogousli vietnamization
predication operator feudalism decisiveness hopefulness callousness formaliti
sensitiviti sensibiliti triplicate formative formalize electriciti electrical
hopeful goodness revival allowance inference airliner gyroscopic adjustable
defensible irritant replacement adjustment dependent adoption homologou
communism activate angulariti homologous effective bowdlerize probate rate
cease controll roll running a is as by generalizations oscillators
cardiologist hypertension smoking cholesterol alcohol stress echocardiogram
angiogram anesthesia""".split()


def harvest(root, limit):
    seen = {}
    for dirpath, _, files in sorted(os.walk(root)):
        for name in sorted(files):
            if not name.endswith((".py", ".txt", ".rst", ".md")):
                continue
            try:
                with open(os.path.join(dirpath, name), encoding="utf-8") as f:
                    text = f.read()
            except (UnicodeDecodeError, OSError):
                continue
            for w in WORD.findall(text):
                if w not in seen:
                    seen[w] = None
                    if len(seen) >= limit:
                        return list(seen)
    return list(seen)


def main():
    roots = (sys.argv[1] if len(sys.argv) > 1 else "/usr/lib/python3.10").split(":")
    limit = int(sys.argv[2]) if len(sys.argv) > 2 else 23000
    words = list(SEED)
    for root in roots:
        words += harvest(root, limit)
    words = list(dict.fromkeys(words))
    words = sorted(words[:limit])
    stemmer = PorterStemmer(mode=PorterStemmer.MARTIN_EXTENSIONS)
    for w in words:
        print(f"{w}\t{stemmer.stem(w)}")


if __name__ == "__main__":
    main()
