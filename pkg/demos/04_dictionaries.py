"""Dictionary machinery: minimal word graphs and the ambiguity table."""
from hwocr import build_dawg, dawg_lookup, deserialize_dawg, parse_ambigs, serialize_dawg

words = ["car", "card", "care", "cat", "cart", "dog", "dot"]
dawg = build_dawg(words)
print(f"{len(words)} words -> minimal automaton with "
      f"{dawg.node_count} nodes and {dawg.edge_count} edges")

for probe in ("cat", "cart", "ca", "dote", "dog"):
    print(f"  lookup {probe!r}: {dawg_lookup(dawg, probe)}")

blob = serialize_dawg(dawg)
print(f"serialized to {len(blob)} bytes; "
      f"round trip accepts {sorted(deserialize_dawg(blob).iter_words())}")

table = parse_ambigs(b"rn\tm\ncl\td\nvv\tw\n")
print(f"\nambiguity table with {len(table)} advisory rules "
      "(warn-only; output text is never rewritten):")
for rule in table.rules:
    print(f"  {rule.wrong!r} is easily read as {rule.right!r}")
