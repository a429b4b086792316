#pragma once

#include <cstdint>
#include <string>

#include "xclus/schema.hpp"

namespace xclus {

// Synthetic schema-compatible stand-in for the kind of behavioral wearable
// data the pipeline targets. Entities belong to one of two latent well-being
// groups that separate in the training features and shift the validation
// features; a few extreme ticks are planted so the IQR stage has work to do.
struct DemoSpec {
    int entities = 20;
    int days = 20;
    std::uint64_t seed = 0;
    double separation = 3.2;       // group mean gap in within-group sigmas
    double outlier_fraction = 0.02;
};

struct DemoFiles {
    std::string data_csv;
    std::string schema_json;
    std::string preprocess_json;
};

Schema demo_schema();
PreprocessConfig demo_preprocess_config();

// Writes data.csv, schema.json and preprocess.json under out_dir.
DemoFiles generate_demo(const DemoSpec& spec, const std::string& out_dir);

std::string demo_domain_preamble();
std::map<std::string, std::string> demo_glossary();

}  // namespace xclus
