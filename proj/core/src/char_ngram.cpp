#include <stdexcept>

#include "model_io.hpp"
#include "models_impl.hpp"
#include "sqlfuzz/models.hpp"

namespace sqlfuzz {

using namespace detail;

namespace detail {

namespace {

std::uint64_t pack_context(const std::string& s, std::size_t end, int n) {
    std::uint64_t key = 0;
    for (int j = 0; j < n; ++j)
        key |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[end - n + j]))
               << (8 * j);
    return key;
}

}  // namespace

double CharNgramModel::mean_error(const std::string& payload) const {
    if (payload.size() < static_cast<std::size_t>(n) + 1) return 1.0;
    double sum = 0.0;
    std::size_t positions = 0;
    for (std::size_t i = n; i < payload.size(); ++i) {
        std::uint64_t ctx = pack_context(payload, i, n);
        double p = 0.0;
        auto it = context_totals.find(ctx);
        if (it != context_totals.end()) {
            double total = static_cast<double>(it->second);
            double count = 0.0;
            auto ci = counts.find(ctx);
            if (ci != counts.end()) {
                auto vi = ci->second.find(static_cast<std::uint8_t>(payload[i]));
                if (vi != ci->second.end()) count = vi->second;
            }
            p = (count + alpha) / (total + alpha * 256.0);
        } else if (alpha > 0.0) {
            p = 1.0 / 256.0;
        }
        sum += 1.0 - p;
        ++positions;
    }
    return sum / static_cast<double>(positions);
}

double CharNgramModel::classify(const std::string& payload) const {
    // Trained on malicious text: a low prediction error means the payload
    // looks like the attack corpus, hence high malicious confidence.
    return 1.0 - mean_error(payload);
}

void CharNgramModel::save(std::ostream& out) const {
    out << kModelMagic << " " << kModelFormatVersion << "\n";
    out << "kind char-ngram\n";
    out << "n " << n << "\n";
    out << "alpha ";
    write_double(out, alpha);
    out << "\n";
    out << "contexts " << counts.size() << "\n";
    for (const auto& [ctx, next] : counts) {
        out << ctx << " " << context_totals.at(ctx) << " " << next.size();
        for (const auto& [byte, count] : next)
            out << " " << static_cast<int>(byte) << " " << count;
        out << "\n";
    }
    out << "end\n";
}

std::unique_ptr<CharNgramModel> CharNgramModel::load_body(std::istream& in) {
    auto m = std::make_unique<CharNgramModel>();
    expect_tag(in, "n");
    in >> m->n;
    expect_tag(in, "alpha");
    m->alpha = read_double(in);
    expect_tag(in, "contexts");
    std::size_t n_contexts = 0;
    in >> n_contexts;
    for (std::size_t i = 0; i < n_contexts; ++i) {
        std::uint64_t ctx = 0, total = 0;
        std::size_t entries = 0;
        in >> ctx >> total >> entries;
        if (!in) throw std::runtime_error("truncated char-ngram model");
        m->context_totals[ctx] = total;
        auto& next = m->counts[ctx];
        for (std::size_t j = 0; j < entries; ++j) {
            int byte = 0;
            std::uint32_t count = 0;
            in >> byte >> count;
            next[static_cast<std::uint8_t>(byte)] = count;
        }
    }
    return m;
}

}  // namespace detail

std::unique_ptr<Detector> train_char_ngram(const Dataset& ds, int n, double alpha) {
    if (n < 1) throw std::invalid_argument("ngram context length must be >= 1");
    auto model = std::make_unique<CharNgramModel>();
    model->n = n;
    model->alpha = alpha;
    std::size_t used = 0;
    for (const Record& r : ds.records) {
        if (r.label != Label::Malicious) continue;
        ++used;
        const std::string& q = r.query;
        for (std::size_t i = n; i < q.size(); ++i) {
            std::uint64_t ctx = pack_context(q, i, n);
            ++model->counts[ctx][static_cast<std::uint8_t>(q[i])];
            ++model->context_totals[ctx];
        }
    }
    if (used == 0) throw std::invalid_argument("char-ngram training needs malicious records");
    return model;
}

double char_ngram_mean_error(const Detector& model, const std::string& payload) {
    const auto* m = dynamic_cast<const CharNgramModel*>(&model);
    if (!m) throw std::invalid_argument("model is not a char-ngram detector");
    return m->mean_error(payload);
}

}  // namespace sqlfuzz
