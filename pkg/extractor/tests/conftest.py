"""Shared fixtures for the extractor test suite."""

import pytest


@pytest.fixture(scope="session")
def graph_file(tmp_path_factory):
    # the training toolkit is the producer of record for graph files;
    # its generator gives a realistic mixed corpus without hand-rolling
    from skillgraph.toydata import generate_toy_dataset

    path = tmp_path_factory.mktemp("graphs") / "toy.json"
    path.write_bytes(generate_toy_dataset(seed=2, n_examples=24))
    return path
