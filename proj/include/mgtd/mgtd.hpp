#pragma once

#include "mgtd/assets.hpp"
#include "mgtd/characteristics.hpp"
#include "mgtd/corpus.hpp"
#include "mgtd/eval.hpp"
#include "mgtd/lexicon.hpp"
#include "mgtd/manifest.hpp"
#include "mgtd/metrics.hpp"
#include "mgtd/models.hpp"
#include "mgtd/readability.hpp"
#include "mgtd/rephrase.hpp"
#include "mgtd/stats.hpp"
#include "mgtd/textstats.hpp"
#include "mgtd/tfidf.hpp"
