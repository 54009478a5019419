#pragma once

#include "favd/audio_score.hpp"
#include "favd/corpus.hpp"
#include "favd/embedding.hpp"
#include "favd/entity_score.hpp"
#include "favd/error.hpp"
#include "favd/harness.hpp"
#include "favd/lexicon.hpp"
#include "favd/rng.hpp"
#include "favd/text.hpp"
#include "favd/text_metrics.hpp"

#include "favd/avlformer/config.hpp"
#include "favd/avlformer/container.hpp"
#include "favd/avlformer/dataset.hpp"
#include "favd/avlformer/features.hpp"
#include "favd/avlformer/generate.hpp"
#include "favd/avlformer/mask.hpp"
#include "favd/avlformer/model.hpp"
#include "favd/avlformer/training.hpp"
#include "favd/avlformer/vocab.hpp"
