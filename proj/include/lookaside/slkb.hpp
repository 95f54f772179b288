#pragma once
// Spatial Landmark Knowledge Base: a hierarchical description -> positions
// store with insert/merge, NMS-style spatial pruning, embedding-based
// retrieval and line-delimited JSON persistence.
//
// Thread contract: any number of concurrent readers OR one exclusive writer.
// retrieve() is a pure read; upsert/prune_positions/load take exclusive access.

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "lookaside/embedding.hpp"
#include "lookaside/geometry.hpp"

namespace lookaside::slkb {

struct LandmarkRecord {
    std::string description;   // short noun phrase
    geom::WorldPoint position;
    double confidence = 1.0;   // in [0, 1]
    std::string source_id;     // observation / trajectory provenance

    void validate() const {
        if (trim(description).empty()) throw Error("empty landmark description");
        if (!std::isfinite(confidence) || confidence < 0.0 || confidence > 1.0)
            throw Error("landmark confidence must lie in [0, 1]");
        if (!std::isfinite(position.x) || !std::isfinite(position.y) || !std::isfinite(position.z))
            throw Error("landmark position must be finite");
    }
};

struct PositionEntry {
    geom::WorldPoint position;
    double confidence = 1.0;

    friend bool operator==(const PositionEntry&, const PositionEntry&) = default;
};

struct RetrievedLandmark {
    std::string instruction_landmark;
    std::string matched_description;
    double similarity = 0.0;
    std::vector<geom::WorldPoint> positions;
};

using RetrievedLandmarkSet = std::vector<RetrievedLandmark>;

inline constexpr int kKbFormatVersion = 1;
inline constexpr double kDefaultMergeThreshold = 0.90;
inline constexpr double kDefaultPruneRadiusM = 20.0;

class KnowledgeBase {
public:
    explicit KnowledgeBase(std::shared_ptr<const Embedder> embedder = default_embedder())
        : embedder_(std::move(embedder)) {}

    bool empty() const { return entries_.empty(); }
    size_t size() const { return entries_.size(); }
    const std::map<std::string, std::vector<PositionEntry>>& entries() const { return entries_; }
    const Embedder& embedder() const { return *embedder_; }

    // Appends the record under the best-matching existing key when its cosine
    // similarity reaches merge_threshold (an exact-string match always merges);
    // otherwise inserts a new key.
    void upsert(const LandmarkRecord& record, double merge_threshold = kDefaultMergeThreshold) {
        record.validate();
        if (!(merge_threshold > 0.0) || merge_threshold > 1.0)
            throw Error("merge threshold must lie in (0, 1]");
        const std::string desc = trim(record.description);

        auto exact = entries_.find(desc);
        if (exact != entries_.end()) {
            exact->second.push_back({record.position, record.confidence});
            return;
        }

        const EmbeddingVector emb = embedder_->embed(desc);
        std::string best_key;
        double best_sim = -2.0;
        for (const auto& [key, key_emb] : embeddings_) {
            const double s = cosine_similarity(emb, key_emb);
            if (s > best_sim) {  // strict >, so ties keep the lexicographically smaller key
                best_sim = s;
                best_key = key;
            }
        }
        if (!best_key.empty() && best_sim >= merge_threshold) {
            entries_[best_key].push_back({record.position, record.confidence});
        } else {
            entries_[desc].push_back({record.position, record.confidence});
            embeddings_.emplace(desc, std::move(emb));
        }
    }

    // Per key: sort by confidence descending (ties keep insertion order), then
    // greedily keep the best and drop every other position within radius of a
    // kept one. The surviving list is left in that confidence order.
    void prune_positions(double radius_m = kDefaultPruneRadiusM) {
        if (!(radius_m > 0.0)) throw Error("prune radius must be positive");
        for (auto& [key, positions] : entries_) {
            std::vector<size_t> order(positions.size());
            std::iota(order.begin(), order.end(), size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                return positions[a].confidence > positions[b].confidence;
            });
            std::vector<PositionEntry> kept;
            for (size_t idx : order) {
                bool suppressed = false;
                for (const auto& k : kept) {
                    if (geom::distance(positions[idx].position, k.position) <= radius_m) {
                        suppressed = true;
                        break;
                    }
                }
                if (!suppressed) kept.push_back(positions[idx]);
            }
            positions = std::move(kept);
        }
    }

    // For each instruction landmark, the key with maximum cosine similarity
    // (ties broken toward the lexicographically smaller key) plus all of its
    // positions, in instruction order.
    RetrievedLandmarkSet retrieve(const std::vector<std::string>& instruction_landmarks) const {
        if (entries_.empty()) throw Error("knowledge base empty");
        if (instruction_landmarks.empty()) throw Error("no instruction landmarks to retrieve");
        RetrievedLandmarkSet out;
        out.reserve(instruction_landmarks.size());
        for (const auto& query : instruction_landmarks) {
            const EmbeddingVector q = embedder_->embed(query);
            const std::string* best_key = nullptr;
            double best_sim = -2.0;
            for (const auto& [key, key_emb] : embeddings_) {
                const double s = cosine_similarity(q, key_emb);
                if (s > best_sim) {
                    best_sim = s;
                    best_key = &key;
                }
            }
            RetrievedLandmark item;
            item.instruction_landmark = query;
            item.matched_description = *best_key;
            item.similarity = best_sim;
            for (const auto& p : entries_.at(*best_key)) item.positions.push_back(p.position);
            out.push_back(std::move(item));
        }
        return out;
    }

    // Line-delimited JSON: a header object followed by one object per key.
    void save(const std::filesystem::path& path) const {
        std::ofstream f(path);
        if (!f) throw Error("cannot open for writing: " + path.string());
        nlohmann::ordered_json header;
        header["slkb_version"] = kKbFormatVersion;
        header["embedding"] = embedder_->id();
        f << header.dump() << '\n';
        for (const auto& [key, positions] : entries_) {
            nlohmann::ordered_json line;
            line["desc"] = key;
            auto& pts = line["pts"] = nlohmann::ordered_json::array();
            for (const auto& p : positions) {
                nlohmann::ordered_json pt;
                pt["x"] = p.position.x;
                pt["y"] = p.position.y;
                pt["z"] = p.position.z;
                pt["c"] = p.confidence;
                pts.push_back(std::move(pt));
            }
            f << line.dump() << '\n';
        }
        if (!f) throw Error("write failed: " + path.string());
    }

    static KnowledgeBase load(const std::filesystem::path& path,
                              std::shared_ptr<const Embedder> embedder = default_embedder()) {
        std::ifstream f(path);
        if (!f) throw Error("cannot open knowledge base file: " + path.string());
        KnowledgeBase kb(std::move(embedder));
        std::string line;
        size_t line_no = 0;
        bool have_header = false;
        while (std::getline(f, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(line);
            } catch (const nlohmann::json::exception& e) {
                throw Error("knowledge base parse error at line " + std::to_string(line_no) +
                            ": " + e.what());
            }
            if (!have_header) {
                if (!j.contains("slkb_version"))
                    throw Error("knowledge base parse error at line 1: missing slkb_version header");
                if (j["slkb_version"].get<int>() != kKbFormatVersion)
                    throw Error("unsupported slkb_version " + j["slkb_version"].dump() +
                                " (expected " + std::to_string(kKbFormatVersion) + ")");
                const std::string emb_id = j.value("embedding", std::string{});
                if (emb_id != kb.embedder_->id())
                    throw Error("embedding provider mismatch: file uses '" + emb_id +
                                "', loader uses '" + kb.embedder_->id() + "'");
                have_header = true;
                continue;
            }
            try {
                const std::string desc = j.at("desc").get<std::string>();
                if (trim(desc).empty())
                    throw Error("knowledge base parse error at line " + std::to_string(line_no) +
                                ": empty desc");
                if (kb.entries_.count(desc))
                    throw Error("knowledge base parse error at line " + std::to_string(line_no) +
                                ": duplicate key '" + desc + "'");
                std::vector<PositionEntry> positions;
                for (const auto& pt : j.at("pts")) {
                    positions.push_back({{pt.at("x").get<double>(), pt.at("y").get<double>(),
                                          pt.at("z").get<double>()},
                                         pt.at("c").get<double>()});
                }
                if (positions.empty())
                    throw Error("knowledge base parse error at line " + std::to_string(line_no) +
                                ": empty position list");
                kb.embeddings_.emplace(desc, kb.embedder_->embed(desc));
                kb.entries_.emplace(desc, std::move(positions));
            } catch (const nlohmann::json::exception& e) {
                throw Error("knowledge base parse error at line " + std::to_string(line_no) +
                            ": " + e.what());
            }
        }
        if (!have_header) throw Error("knowledge base file has no header: " + path.string());
        return kb;
    }

    friend bool operator==(const KnowledgeBase& a, const KnowledgeBase& b) {
        return a.embedder_->id() == b.embedder_->id() && a.entries_ == b.entries_;
    }

private:
    std::shared_ptr<const Embedder> embedder_;
    std::map<std::string, std::vector<PositionEntry>> entries_;
    // One embedding per key, maintained eagerly by upsert/load so that
    // retrieve stays a pure read.
    std::map<std::string, EmbeddingVector> embeddings_;
};

}  // namespace lookaside::slkb
