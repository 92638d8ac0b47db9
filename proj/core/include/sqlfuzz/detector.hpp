#pragma once

#include <iosfwd>
#include <memory>
#include <string>

namespace sqlfuzz {

/// A trained (or stub) detector: maps a payload to confidence in [0,1],
/// 1 meaning malicious. Immutable after construction; classify must be safe
/// for unlimited concurrent callers.
class Detector {
public:
    virtual ~Detector() = default;

    virtual double classify(const std::string& payload) const = 0;

    /// Short kind tag ("naive-bayes", "linear-svm", ...).
    virtual std::string kind() const = 0;

    /// Self-describing textual serialization; round-trips bit-exactly.
    virtual void save(std::ostream& out) const = 0;
};

/// Loads any model saved by Detector::save. Throws std::runtime_error on a
/// malformed stream or an unknown format version.
std::unique_ptr<Detector> load_detector(std::istream& in);
std::unique_ptr<Detector> load_detector_file(const std::string& path);
void save_detector_file(const Detector& model, const std::string& path);

}  // namespace sqlfuzz
