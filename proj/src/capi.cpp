#include "declab/declab.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>

#include "declab/constants.hpp"
#include "declab/error.hpp"
#include "declab/experiment.hpp"
#include "declab/probmodel.hpp"
#include "declab/sequence_io.hpp"

struct declab_space {
  declab::SpaceDescriptor value;
};
struct declab_sequence {
  std::shared_ptr<const declab::AdaptedSequence> value;
};
struct declab_pair {
  declab::TangentPair value;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_warnings;

declab_status map_code(declab::ErrorCode code) {
  switch (code) {
    case declab::ErrorCode::invalid_argument: return DECLAB_ERR_INVALID_ARGUMENT;
    case declab::ErrorCode::dimension_mismatch: return DECLAB_ERR_DIMENSION_MISMATCH;
    case declab::ErrorCode::budget_exceeded: return DECLAB_ERR_BUDGET_EXCEEDED;
    case declab::ErrorCode::precondition: return DECLAB_ERR_PRECONDITION;
    case declab::ErrorCode::parse: return DECLAB_ERR_PARSE;
    case declab::ErrorCode::not_applicable: return DECLAB_ERR_NOT_APPLICABLE;
  }
  return DECLAB_ERR_INTERNAL;
}

template <class Fn>
declab_status guarded(Fn&& fn) {
  last_error.clear();
  try {
    fn();
    return DECLAB_OK;
  } catch (const declab::Error& e) {
    last_error = e.what();
    return map_code(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return DECLAB_ERR_INTERNAL;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void need(const void* p, const char* what) {
  if (!p) throw declab::Error(declab::ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

}  // namespace

extern "C" {

const char* declab_version(void) { return declab::version(); }
const char* declab_last_error(void) { return last_error.c_str(); }
const char* declab_last_warnings(void) { return last_warnings.c_str(); }

declab_status declab_space_parse(const char* text, declab_space** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = new declab_space{declab::SpaceDescriptor::parse(text)};
  });
}

declab_status declab_space_norm(const declab_space* space, const double* x, size_t n, double* out) {
  return guarded([&] {
    need(space, "space");
    need(out, "out");
    if (n > 0) need(x, "x");
    *out = space->value.norm(std::span<const double>(x, n));
  });
}

declab_status declab_space_dim(const declab_space* space, size_t* out) {
  return guarded([&] {
    need(space, "space");
    need(out, "out");
    *out = space->value.dim();
  });
}

declab_status declab_space_r(const declab_space* space, double* out) {
  return guarded([&] {
    need(space, "space");
    need(out, "out");
    *out = space->value.r();
  });
}

void declab_space_free(declab_space* space) { delete space; }

declab_status declab_lu_constants(double p, double* l, double* u) {
  return guarded([&] {
    need(l, "l");
    need(u, "u");
    const auto lu = declab::lu_constants(p);
    *l = lu.l;
    *u = lu.u;
  });
}

declab_status declab_sequence_from_json(const char* json, declab_sequence** out) {
  return guarded([&] {
    need(json, "json");
    need(out, "out");
    auto spec = declab::spec_from_string(json);
    *out = new declab_sequence{std::make_shared<const declab::AdaptedSequence>(declab::AdaptedSequence::build(spec))};
  });
}

declab_status declab_sequence_to_json(const declab_sequence* seq, char** out) {
  return guarded([&] {
    need(seq, "seq");
    need(out, "out");
    *out = copy_string(declab::spec_to_string(seq->value->to_spec()));
  });
}

void declab_sequence_free(declab_sequence* seq) { delete seq; }

declab_status declab_decouple(const declab_sequence* seq, declab_pair** out) {
  return guarded([&] {
    need(seq, "seq");
    need(out, "out");
    *out = new declab_pair{declab::decouple(seq->value)};
  });
}

void declab_pair_free(declab_pair* pair) { delete pair; }

declab_status declab_verify_tangency(const declab_pair* pair, double tol, int* tangent,
                                     int* conditionally_independent) {
  return guarded([&] {
    need(pair, "pair");
    const auto report = declab::verify_tangency(pair->value, tol);
    if (tangent) *tangent = report.tangent ? 1 : 0;
    if (conditionally_independent) *conditionally_independent = report.conditionally_independent ? 1 : 0;
  });
}

declab_status declab_ratio(const declab_pair* pair, double p, const char* direction, double* out) {
  return guarded([&] {
    need(pair, "pair");
    need(direction, "direction");
    need(out, "out");
    const auto r = declab::ratio(pair->value, p, declab::direction_from_string(direction));
    if (!r) throw declab::Error(declab::ErrorCode::not_applicable, "ratio denominator vanishes");
    *out = *r;
  });
}

declab_status declab_run(const char* command, const char* config_json, char** report, int* exit_code) {
  return guarded([&] {
    need(report, "report");
    need(exit_code, "exit_code");
    *report = nullptr;
    last_warnings.clear();
    const auto result = declab::run_json(command ? command : "", config_json ? config_json : "");
    for (const auto& w : result.warnings) last_warnings += w + "\n";
    *exit_code = result.exit_code;
    *report = copy_string(result.output);
    if (!result.error.empty()) last_error = result.error;
  });
}

void declab_string_free(char* text) { std::free(text); }

}  // extern "C"
