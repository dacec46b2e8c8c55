# Report package: deterministic JSON output
