#include "suction/plotdata.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "suction/dataset.hpp"

namespace suction {

std::vector<CurvePoint> precision_recall_curve(const std::vector<ScoredLabel>& data)
{
    if (data.empty()) throw std::invalid_argument("no scored samples");
    std::vector<ScoredLabel> sorted = data;
    std::stable_sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    std::size_t positives = 0;
    for (const auto& s : sorted) positives += s.label != 0 ? 1 : 0;
    const auto n = static_cast<double>(sorted.size());

    std::vector<CurvePoint> curve;
    std::size_t tp = 0;
    std::size_t taken = 0;
    for (std::size_t i = 0; i < sorted.size();) {
        const double t = sorted[i].score;
        while (i < sorted.size() && sorted[i].score == t) {
            tp += sorted[i].label != 0 ? 1 : 0;
            ++taken;
            ++i;
        }
        CurvePoint p;
        p.threshold = t;
        p.precision = static_cast<double>(tp) / static_cast<double>(taken);
        p.recall = positives == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(positives);
        p.attempt_rate = static_cast<double>(taken) / n;
        p.success_rate = p.precision;
        curve.push_back(p);
    }
    return curve;
}

double average_precision(const std::vector<CurvePoint>& curve)
{
    if (curve.empty()) return 0.0;
    double area = 0.0;
    double prev_r = 0.0;
    double prev_p = curve.front().precision;
    for (const auto& c : curve) {
        area += (c.recall - prev_r) * 0.5 * (c.precision + prev_p);
        prev_r = c.recall;
        prev_p = c.precision;
    }
    return area;
}

std::vector<ScoredLabel> read_scored_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::vector<ScoredLabel> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected lambda,label");
        const std::string a = line.substr(0, comma);
        const std::string b = line.substr(comma + 1);
        char* end = nullptr;
        const double score = std::strtod(a.c_str(), &end);
        if (end == a.c_str()) {
            if (line_no == 1) continue;   // header
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": bad score");
        }
        char* end2 = nullptr;
        const long label = std::strtol(b.c_str(), &end2, 10);
        if (end2 == b.c_str() || (label != 0 && label != 1)) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": label must be 0 or 1");
        }
        out.push_back({score, static_cast<int>(label)});
    }
    return out;
}

std::vector<ScoredLabel> read_dataset_scores(const std::filesystem::path& dataset_dir)
{
    const DatasetManifest m = DatasetManifest::load(dataset_dir / kManifestName);
    std::vector<ScoredLabel> out;
    for (const auto& s : m.shards) {
        for (const auto& t : read_shard(dataset_dir / s.file)) out.push_back({t.lambda, t.label});
    }
    return out;
}

void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& curve)
{
    out << "tau,precision,recall,attempt_rate,success_rate\n";
    for (const auto& c : curve) {
        out << c.threshold << ',' << c.precision << ',' << c.recall << ',' << c.attempt_rate << ',' << c.success_rate << '\n';
    }
}

}  // namespace suction
