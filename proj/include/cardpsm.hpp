#pragma once

#include "cardpsm/error.hpp"
#include "cardpsm/rational.hpp"
#include "cardpsm/permutation.hpp"
#include "cardpsm/cards.hpp"
#include "cardpsm/random.hpp"
#include "cardpsm/function.hpp"
#include "cardpsm/shuffle.hpp"
#include "cardpsm/psm.hpp"
#include "cardpsm/protocol.hpp"
#include "cardpsm/report.hpp"
#include "cardpsm/transform.hpp"
#include "cardpsm/verify.hpp"
#include "cardpsm/serialize.hpp"
