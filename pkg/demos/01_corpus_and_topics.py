"""From a raw corpus to labeled evolving topics.

Generates a synthetic citation-linked corpus with planted themes, trains
document vectors, clusters content and citation structure, intersects the
two clusterings into topics, and slices each topic along the timeline with
a TF-IDF label per (topic, period).

Run:  python demos/01_corpus_and_topics.py
"""

import atem

print("== generate a corpus with 12 planted themes over 10 years ==")
spec = atem.default_spec(seed=7)
corpus, truth = atem.generate_corpus(spec)
report = atem.validate(corpus)
print(f"documents: {report.documents}, citation edges: {report.edges}, "
      f"periods: {report.periods}")

print("\n== train joint word/document vectors ==")
emb = atem.train_doc_embeddings(corpus, atem.EmbedParams(dim=48, epochs=12, seed=17))
print(f"dim={emb.dim}, vocabulary={len(emb.vocab)} tokens")

print("\n== content clusters (PCA 16 + density clustering) ==")
reduced = atem.reduce_dimensions(emb.doc_vectors, 16, "pca")
content = atem.density_cluster(reduced)
noise = sum(1 for v in content.labels.values() if v == atem.NOISE)
print(f"content clusters: {content.cluster_count} (+{noise} noise documents)")

print("\n== citation communities (modularity maximization) ==")
communities = atem.detect_communities(corpus, atem.CommunityParams(seed=5))
graph = atem.build_citation_graph(corpus)
print(f"communities: {communities.cluster_count}, "
      f"modularity: {atem.modularity(communities.labels, graph):.3f}")

print("\n== aggregate: content cluster x community ==")
topic_set = atem.aggregate(content, communities)
sizes = sorted((len(t) for t in topic_set.topics), reverse=True)
print(f"topics: {len(topic_set.topics)}, largest sizes: {sizes[:8]}")

print("\n== slice along the timeline and label with group TF-IDF ==")
evolving = atem.slice_topics(topic_set, corpus, min_docs=3)
evolving = atem.represent_ctfidf(evolving, corpus, top_n=5)
topic = max(evolving, key=lambda t: len(t.all_docs()))
print(f"largest evolving topic {topic.topic_id} "
      f"({len(topic.all_docs())} documents):")
for period in topic.active_periods():
    rep = topic.per_period_rep[period]
    year = corpus.timeline.periods[period].start_year
    print(f"  {year}: {', '.join(rep.tokens())}")
