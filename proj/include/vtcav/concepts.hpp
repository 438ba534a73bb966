#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vtcav/clip.hpp"
#include "vtcav/tracks.hpp"

namespace vtcav {

enum class ConceptKind { spatial, spatiotemporal, random };

std::string concept_kind_name(ConceptKind k);
ConceptKind concept_kind_from_name(const std::string& s);

struct ConceptSet {
    std::string name;
    ConceptKind kind = ConceptKind::spatial;
    std::vector<VideoClip> clips;
    std::string origin;  // detector run, track id, or sampling seed
};

// Every violated ConceptSet invariant (shared extents, spatial frame identity,
// clip count >= 2); empty means valid.
std::vector<std::string> validate_concept_set(const ConceptSet& set);

// One image crop repeated T times. frame shape H x W x 3.
VideoClip build_spatial_concept(const Tensor& frame, int T, int out_h, int out_w);

// Crops the tracked object per frame, centers each crop in a pad_value canvas
// of the track's max-box size (floor-rule offsets). Tracks longer than T are
// uniformly subsampled to exactly T frames. No resize to model input here;
// see resize_clip.
VideoClip build_spatiotemporal_concept(const VideoClip& video, const Track& track, int T,
                                       float pad_value);

// Frame indices selected when subsampling a length-n track to k frames:
// round(linspace(0, n-1, k)), strictly increasing.
std::vector<int> uniform_subsample_indices(int n, int k);

std::vector<ConceptSet> sample_random_sets(const std::vector<VideoClip>& corpus, int n_sets,
                                           int set_size, const std::set<std::string>& exclude,
                                           uint64_t seed);

// Concept manifest: JSON list of {name, kind, origin, clips: [paths]}.
struct ConceptManifestEntry {
    std::string name;
    ConceptKind kind = ConceptKind::spatial;
    std::string origin;
    std::vector<std::string> clip_paths;  // relative to manifest directory
};

void write_concept_manifest(const std::string& path,
                            const std::vector<ConceptManifestEntry>& entries);
std::vector<ConceptManifestEntry> read_concept_manifest(const std::string& path);

}  // namespace vtcav
