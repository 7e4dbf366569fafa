#ifndef ICSCLUST_ICSCLUST_HPP
#define ICSCLUST_ICSCLUST_HPP

// Umbrella header: invariant coordinate selection, the scatter estimators
// that feed it, component selection, clustering back-ends, evaluation
// metrics, data generators, and the experiment pipeline.

#include "icsclust/cluster.hpp"
#include "icsclust/csv.hpp"
#include "icsclust/datasets.hpp"
#include "icsclust/ics.hpp"
#include "icsclust/matstat.hpp"
#include "icsclust/mcd.hpp"
#include "icsclust/metrics.hpp"
#include "icsclust/pca.hpp"
#include "icsclust/pipeline.hpp"
#include "icsclust/rng.hpp"
#include "icsclust/scatter.hpp"
#include "icsclust/select.hpp"
#include "icsclust/simgen.hpp"
#include "icsclust/specs.hpp"
#include "icsclust/types.hpp"

#endif
