#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "dmcca/experiment.hpp"
#include "dmcca/text.hpp"

namespace {

struct RunFlags {
  std::string config_path;
  std::vector<std::string> methods;
  std::vector<std::string> train_tables, test_tables;
  std::string train_images, train_labels, test_images, test_labels;
  int per_class = 150;
  int d_cap = 0;
  std::string fusion = "sum";
  std::uint64_t seed = 0;
  std::string out_dir;
};

void add_run_options(CLI::App* cmd, RunFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON config; explicit flags override its values");
  cmd->add_option("--train", flags.train_tables, "training feature tables, one per set")
      ->delimiter(',');
  cmd->add_option("--test", flags.test_tables, "test feature tables, one per set")->delimiter(',');
  cmd->add_option("--train-images", flags.train_images, "training IDX image file");
  cmd->add_option("--train-labels", flags.train_labels, "training IDX label file");
  cmd->add_option("--test-images", flags.test_images, "test IDX image file");
  cmd->add_option("--test-labels", flags.test_labels, "test IDX label file");
  cmd->add_option("--per-class", flags.per_class,
                  "with IDX inputs, keep the first N samples per class (0 = all)");
  cmd->add_option("--d-max", flags.d_cap, "sweep dimensions 1..N instead of the default range");
  cmd->add_option("--fusion", flags.fusion, "fusion strategy: sum or concat");
  cmd->add_option("--seed", flags.seed, "seed recorded with the run");
  cmd->add_option("--out", flags.out_dir, "output directory");
}

dmcca::ExperimentConfig build_config(const CLI::App* cmd, const RunFlags& flags) {
  dmcca::ExperimentConfig config;
  if (!flags.config_path.empty()) config = dmcca::config_from_json_file(flags.config_path);

  if (cmd->count("--train")) config.train_tables = flags.train_tables;
  if (cmd->count("--test")) config.test_tables = flags.test_tables;
  if (cmd->count("--train-images")) config.train_images = flags.train_images;
  if (cmd->count("--train-labels")) config.train_labels = flags.train_labels;
  if (cmd->count("--test-images")) config.test_images = flags.test_images;
  if (cmd->count("--test-labels")) config.test_labels = flags.test_labels;
  if (cmd->count("--per-class")) config.per_class = flags.per_class;
  if (cmd->count("--d-max")) config.d_cap = flags.d_cap;
  if (cmd->count("--fusion")) config.fusion = dmcca::fusion_from_string(flags.fusion);
  if (cmd->count("--seed")) config.seed = flags.seed;
  if (cmd->count("--out")) config.out_dir = flags.out_dir;
  if (config.out_dir.empty()) config.out_dir = "out";

  if (cmd->count("--method")) {
    config.methods.clear();
    for (const auto& name : flags.methods)
      config.methods.push_back(dmcca::method_from_string(name));
  }
  return config;
}

void print_rows(const std::vector<dmcca::ComparisonRow>& rows) {
  std::cout << "method,best_d,best_accuracy,d_max\n";
  for (const auto& row : rows)
    std::cout << row.method << ',' << row.best_d << ','
              << dmcca::to_string_roundtrip(row.best_accuracy) << ',' << row.d_max << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiset canonical-correlation fusion toolkit"};
  app.require_subcommand(1);

  auto* extract = app.add_subcommand(
      "extract", "Extract the three digit feature tables from an IDX image/label pair");
  std::string images_path, labels_path, extract_out = "features";
  int extract_per_class = 150;
  extract->add_option("--images", images_path, "IDX image file")->required();
  extract->add_option("--labels", labels_path, "IDX label file")->required();
  extract->add_option("--out", extract_out, "output directory");
  extract->add_option("--per-class", extract_per_class,
                      "keep the first N samples per class (0 = all)");

  auto* synth = app.add_subcommand("synth", "Generate a synthetic multiset dataset");
  dmcca::SyntheticSpec spec;
  std::string synth_out = "synthetic";
  synth->add_option("--sets", spec.set_count, "number of feature sets");
  synth->add_option("--classes", spec.class_count, "number of classes");
  synth->add_option("--train-samples", spec.n_train, "training samples");
  synth->add_option("--test-samples", spec.n_test, "test samples");
  synth->add_option("--dims", spec.dims, "per-set feature dimensions")->delimiter(',');
  synth->add_option("--separation", spec.separation, "class-mean separation");
  synth->add_option("--shared", spec.shared_strength, "shared latent signal strength");
  synth->add_option("--noise", spec.noise, "independent noise level");
  synth->add_option("--seed", spec.seed, "generator seed");
  synth->add_option("--out", synth_out, "output directory");

  auto* run = app.add_subcommand("run", "Fit, sweep and evaluate the configured methods");
  RunFlags run_flags;
  run->add_option("--method", run_flags.methods,
                  "methods to compare: serial, cca, mcca, dcca, dmcca")
      ->delimiter(',');
  add_run_options(run, run_flags);

  auto* sweep = app.add_subcommand("sweep", "Accuracy-vs-dimension sweep for a single method");
  RunFlags sweep_flags;
  sweep->add_option("--method", sweep_flags.methods, "method to sweep")->delimiter(',');
  add_run_options(sweep, sweep_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) {
      dmcca::cmd_extract(images_path, labels_path, extract_out, extract_per_class,
                         dmcca::GaborBankSpec{}, dmcca::ZernikeSpec{});
      std::cout << "wrote gabor_mean.csv, gabor_std.csv, zernike.csv under " << extract_out
                << '\n';
    } else if (synth->parsed()) {
      dmcca::cmd_synth(spec, synth_out);
      std::cout << "wrote " << spec.set_count << " train/test table pairs under " << synth_out
                << '\n';
    } else if (run->parsed()) {
      dmcca::ExperimentConfig config = build_config(run, run_flags);
      if (config.methods.empty())
        config.methods = {dmcca::Method::Serial, dmcca::Method::Mcca, dmcca::Method::Dmcca};
      const dmcca::ExperimentResult result = dmcca::run_experiment(config);
      print_rows(result.rows);
      std::cout << "wrote " << result.files.back() << '\n';
    } else if (sweep->parsed()) {
      dmcca::ExperimentConfig config = build_config(sweep, sweep_flags);
      if (config.methods.empty()) config.methods = {dmcca::Method::Dmcca};
      if (config.methods.size() != 1)
        throw std::invalid_argument("sweep takes exactly one method");
      const dmcca::ExperimentResult result = dmcca::run_experiment(config);
      print_rows(result.rows);
      std::cout << "wrote " << result.files.front() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
