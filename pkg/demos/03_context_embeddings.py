"""Per-period topic embeddings from time-decayed walks.

Each period trains on random walks over the cumulative topic-citation
graph (older edges down-weighted by a half-life), warm-starting from the
previous snapshot, so a snapshot never depends on later citations. Two
topics that the same third parties cite drift together -- watch a planted
pair converge at its event period while an unrelated pair stays far.

Run:  python demos/03_context_embeddings.py
"""

import atem
from atem.synthetic import truth_topic_set

spec = atem.default_spec(seed=7)
corpus, truth = atem.generate_corpus(spec)
evolving = atem.slice_topics(truth_topic_set(truth), corpus, min_docs=3)
graph = atem.build_topic_citation_graph(evolving, corpus)

params = atem.WalkParams(dim=32, seed=19, half_life_periods=1.0)
series = atem.train_dynamic_embeddings(graph, len(corpus.timeline), params)
print(f"snapshots: {[len(s) for s in series.snapshots]}")

event = truth.events[0]
a, b = f"G{event.topic_a}", f"G{event.topic_b}"
print(f"\n== planted event: ({a}, {b}) start co-citing at period {event.period} ==")
def fmt(d):
    return "   --" if d is None else f"{d:5.3f}"


print("period  dist(pair)  dist(G8,G9)")
for period in range(series.n_periods()):
    d_pair = series.distance(a, b, period)
    d_ref = series.distance("G8", "G9", period)
    print(f"  {period}     {fmt(d_pair)}       {fmt(d_ref)}")

print("\nThe planted pair collapses right at its event period and stays in")
print("each other's neighborhoods afterwards. Early snapshots are built")
print("from very few citations and wobble for every pair; the min-norm and")
print("novelty filters in the detection stage are there to absorb that.")
