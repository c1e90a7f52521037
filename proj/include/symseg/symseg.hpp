// Convenience umbrella header.
#ifndef SYMSEG_SYMSEG_HPP
#define SYMSEG_SYMSEG_HPP

#include "symseg/changepoint.hpp"
#include "symseg/errors.hpp"
#include "symseg/evaluation.hpp"
#include "symseg/graph.hpp"
#include "symseg/method_types.hpp"
#include "symseg/midi.hpp"
#include "symseg/norm_method.hpp"
#include "symseg/note.hpp"
#include "symseg/pipeline.hpp"
#include "symseg/sweep.hpp"

#endif // SYMSEG_SYMSEG_HPP
