#pragma once

// Umbrella header: critical node/link identification in complex networks
// via spectral robustness metrics (exact oracle) and an inductive GNN
// ranker trained to reproduce the oracle's ordering.

#include "critgraph/corpus.hpp"
#include "critgraph/errors.hpp"
#include "critgraph/eval.hpp"
#include "critgraph/generate.hpp"
#include "critgraph/graph.hpp"
#include "critgraph/io.hpp"
#include "critgraph/metrics.hpp"
#include "critgraph/model.hpp"
#include "critgraph/oracle.hpp"
#include "critgraph/parallel.hpp"
#include "critgraph/rng.hpp"
#include "critgraph/spectrum.hpp"
#include "critgraph/sym_eigen.hpp"
#include "critgraph/train.hpp"
