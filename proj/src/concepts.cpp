#include "vtcav/concepts.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

namespace vtcav {

std::string concept_kind_name(ConceptKind k) {
    switch (k) {
        case ConceptKind::spatial: return "spatial";
        case ConceptKind::spatiotemporal: return "spatiotemporal";
        case ConceptKind::random: return "random";
    }
    return "unknown";
}

ConceptKind concept_kind_from_name(const std::string& s) {
    if (s == "spatial") return ConceptKind::spatial;
    if (s == "spatiotemporal") return ConceptKind::spatiotemporal;
    if (s == "random") return ConceptKind::random;
    throw std::invalid_argument("unknown concept kind: " + s);
}

std::vector<std::string> validate_concept_set(const ConceptSet& set) {
    std::vector<std::string> violations;
    if (set.clips.size() < 2) violations.push_back("fewer than 2 clips");
    if (set.clips.empty()) return violations;

    const auto& first = set.clips.front();
    for (const auto& c : set.clips) {
        if (c.T() != first.T() || c.H() != first.H() || c.W() != first.W()) {
            violations.push_back("clips do not share identical T,H,W");
            break;
        }
    }
    if (set.kind == ConceptKind::spatial) {
        for (const auto& c : set.clips) {
            const int64_t frame_sz = c.H() * c.W() * c.C();
            bool identical = true;
            for (int64_t t = 1; t < c.T() && identical; ++t)
                identical = std::equal(c.frames.data.begin(), c.frames.data.begin() + frame_sz,
                                       c.frames.data.begin() + t * frame_sz);
            if (!identical) {
                violations.push_back("spatial concept clip has non-identical frames: " + c.clip_id);
                break;
            }
        }
    }
    return violations;
}

VideoClip build_spatial_concept(const Tensor& frame, int T, int out_h, int out_w) {
    if (T < 1) throw std::invalid_argument("spatial concept: T must be >= 1");
    if (frame.shape.size() != 3 || frame.shape[0] < 1 || frame.shape[1] < 1)
        throw std::invalid_argument("spatial concept: zero-area crop");
    Tensor resized = resize_frame_bilinear(frame, out_h, out_w);
    VideoClip clip;
    clip.frames = Tensor({T, out_h, out_w, 3});
    const int64_t frame_sz = static_cast<int64_t>(out_h) * out_w * 3;
    for (int t = 0; t < T; ++t)
        std::copy_n(resized.data.begin(), frame_sz, clip.frames.data.begin() + t * frame_sz);
    clip.source = "spatial_concept";
    return clip;
}

std::vector<int> uniform_subsample_indices(int n, int k) {
    if (k < 1 || k > n) throw std::invalid_argument("subsample: need 1 <= k <= n");
    std::vector<int> idx;
    if (k == 1) return {0};
    for (int i = 0; i < k; ++i)
        idx.push_back(static_cast<int>(std::llround(static_cast<double>(i) * (n - 1) / (k - 1))));
    return idx;
}

VideoClip build_spatiotemporal_concept(const VideoClip& video, const Track& track, int T,
                                       float pad_value) {
    if (T < 1) throw std::invalid_argument("spatiotemporal concept: T must be >= 1");
    if (track.length() < T)
        throw std::invalid_argument("spatiotemporal concept: track shorter than T");
    for (const auto& b : track.boxes)
        if (b.frame_index < 0 || b.frame_index >= video.T())
            throw std::invalid_argument("spatiotemporal concept: track references frame " +
                                        std::to_string(b.frame_index) + " outside the video");

    // integer pixel crops; canvas is the per-axis max over member crops
    struct IntBox {
        int frame, x1, y1, x2, y2;
    };
    std::vector<IntBox> crops;
    int max_w = 0, max_h = 0;
    for (const auto& b : track.boxes) {
        IntBox ib;
        ib.frame = b.frame_index;
        ib.x1 = std::max(0, static_cast<int>(std::floor(b.x1)));
        ib.y1 = std::max(0, static_cast<int>(std::floor(b.y1)));
        ib.x2 = std::min(static_cast<int>(video.W()), static_cast<int>(std::ceil(b.x2)));
        ib.y2 = std::min(static_cast<int>(video.H()), static_cast<int>(std::ceil(b.y2)));
        if (ib.x2 <= ib.x1 || ib.y2 <= ib.y1)
            throw std::invalid_argument("spatiotemporal concept: zero-area crop");
        max_w = std::max(max_w, ib.x2 - ib.x1);
        max_h = std::max(max_h, ib.y2 - ib.y1);
        crops.push_back(ib);
    }

    std::vector<int> picks = uniform_subsample_indices(track.length(), T);

    VideoClip out;
    out.frames = Tensor({T, max_h, max_w, 3});
    std::fill(out.frames.data.begin(), out.frames.data.end(), pad_value);
    for (int i = 0; i < T; ++i) {
        const IntBox& ib = crops[static_cast<size_t>(picks[i])];
        const int w = ib.x2 - ib.x1, h = ib.y2 - ib.y1;
        const int off_x = (max_w - w) / 2;  // floor rule
        const int off_y = (max_h - h) / 2;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                for (int c = 0; c < 3; ++c)
                    out.at(i, off_y + y, off_x + x, c) = video.at(ib.frame, ib.y1 + y, ib.x1 + x, c);
    }
    out.source = "spatiotemporal_concept:" + track.track_id;
    return out;
}

std::vector<ConceptSet> sample_random_sets(const std::vector<VideoClip>& corpus, int n_sets,
                                           int set_size, const std::set<std::string>& exclude,
                                           uint64_t seed) {
    if (n_sets < 1 || set_size < 1) throw std::invalid_argument("sample_random_sets: bad sizes");
    std::vector<size_t> eligible;
    for (size_t i = 0; i < corpus.size(); ++i)
        if (!exclude.count(corpus[i].clip_id)) eligible.push_back(i);
    if (static_cast<int>(eligible.size()) < set_size)
        throw std::invalid_argument("insufficient corpus: " + std::to_string(eligible.size()) +
                                    " eligible clips, need " + std::to_string(set_size));

    std::mt19937_64 rng(seed);
    std::vector<ConceptSet> sets;
    const bool disjoint = static_cast<int64_t>(n_sets) * set_size <=
                          static_cast<int64_t>(eligible.size());
    std::vector<size_t> pool = eligible;
    if (disjoint) std::shuffle(pool.begin(), pool.end(), rng);
    for (int s = 0; s < n_sets; ++s) {
        ConceptSet set;
        set.name = "random_" + std::to_string(s);
        set.kind = ConceptKind::random;
        set.origin = "seed:" + std::to_string(seed);
        if (disjoint) {
            for (int i = 0; i < set_size; ++i)
                set.clips.push_back(corpus[pool[static_cast<size_t>(s) * set_size + i]]);
        } else {
            std::vector<size_t> shuffled = eligible;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            for (int i = 0; i < set_size; ++i) set.clips.push_back(corpus[shuffled[i]]);
        }
        sets.push_back(std::move(set));
    }
    return sets;
}

void write_concept_manifest(const std::string& path,
                            const std::vector<ConceptManifestEntry>& entries) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& e : entries) {
        j.push_back({{"name", e.name},
                     {"kind", concept_kind_name(e.kind)},
                     {"origin", e.origin},
                     {"clips", e.clip_paths}});
    }
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write concept manifest: " + path);
    os << j.dump(1) << "\n";
}

std::vector<ConceptManifestEntry> read_concept_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read concept manifest: " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("concept manifest parse error in " + path + ": " + e.what());
    }
    std::vector<ConceptManifestEntry> out;
    for (const auto& je : j) {
        ConceptManifestEntry e;
        e.name = je.at("name").get<std::string>();
        e.kind = concept_kind_from_name(je.at("kind").get<std::string>());
        e.origin = je.at("origin").get<std::string>();
        e.clip_paths = je.at("clips").get<std::vector<std::string>>();
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace vtcav
