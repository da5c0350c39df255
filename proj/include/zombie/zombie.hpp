#ifndef ZOMBIE_ZOMBIE_HPP
#define ZOMBIE_ZOMBIE_HPP

#include "zombie/community.hpp"
#include "zombie/detect.hpp"
#include "zombie/errors.hpp"
#include "zombie/evaluate.hpp"
#include "zombie/graph.hpp"
#include "zombie/ingest.hpp"
#include "zombie/random.hpp"
#include "zombie/rank.hpp"
#include "zombie/synth.hpp"
#include "zombie/tables.hpp"
#include "zombie/version.hpp"

#endif // ZOMBIE_ZOMBIE_HPP
