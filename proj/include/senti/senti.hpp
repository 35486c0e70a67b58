#pragma once

// Umbrella header for the senti text-classification library. The HTTP layer
// (senti/http.hpp) is kept out because it pulls in a socket server; include
// it explicitly where needed.

#include "senti/bundle.hpp"
#include "senti/corpus.hpp"
#include "senti/csv.hpp"
#include "senti/error.hpp"
#include "senti/eval.hpp"
#include "senti/features.hpp"
#include "senti/grid_search.hpp"
#include "senti/model_io.hpp"
#include "senti/models.hpp"
#include "senti/preprocess.hpp"
#include "senti/service.hpp"
#include "senti/sha256.hpp"
#include "senti/sparse.hpp"
#include "senti/unicode.hpp"
