"""Exact estimation tools for bipartite incidence graph sampling."""
