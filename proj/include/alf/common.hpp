#pragma once

#include <stdexcept>
#include <string>

namespace alf {

/// Input matrices/vectors disagree on a dimension.
struct DimensionError : std::invalid_argument {
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation only supports small problem sizes (exhaustive oracles).
struct UnsupportedSizeError : std::invalid_argument {
    explicit UnsupportedSizeError(const std::string& what) : std::invalid_argument(what) {}
};

/// Linear solve failed even after jitter escalation.
struct IllConditionedError : std::runtime_error {
    explicit IllConditionedError(const std::string& what) : std::runtime_error(what) {}
};

/// A filter or load produced a dataset with no rows.
struct EmptyDatasetError : std::runtime_error {
    explicit EmptyDatasetError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace alf
