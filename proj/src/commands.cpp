#include "tc3l/commands.hpp"

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "tc3l/serialize.hpp"

namespace tc3l {

namespace {

namespace fs = std::filesystem;

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out.good()) throw std::runtime_error("cannot open " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out.good()) throw std::runtime_error("write failed for " + path);
}

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir + ": " +
                                   ec.message());
}

std::string short_double(double v) {
  std::ostringstream out;
  out << v;  // default precision: compact directory/summary names
  return out.str();
}

std::string render_centers_csv(const ClassCenters& centers) {
  std::string s;
  for (int c = 0; c < centers.k; ++c) {
    for (int j = 0; j < centers.dim; ++j) {
      if (j > 0) s += ",";
      s += format_g17(centers.at(c, j));
    }
    s += "\n";
  }
  return s;
}

std::string render_confusion_csv(const ConfusionStats& stats) {
  std::string s;
  for (int t = 0; t < stats.k; ++t) {
    for (int p = 0; p < stats.k; ++p) {
      if (p > 0) s += ",";
      s += std::to_string(stats.at(t, p));
    }
    s += "\n";
  }
  return s;
}

// worker pool for independent runs; TC3L_THREADS caps parallelism
int worker_count(int runs) {
  int t = 1;
  if (const char* env = std::getenv("TC3L_THREADS")) {
    t = std::atoi(env);
    if (t < 1) t = 1;
  }
  return std::min(t, runs);
}

struct RunJob {
  RunConfig rc;
  std::string dir;
  std::string tag;
  bool ok = false;
  std::string error;
  MetricsReport report;
};

void execute_jobs(std::vector<RunJob>& jobs) {
  const int workers = worker_count(static_cast<int>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto body = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) break;
      try {
        jobs[i].report = run_experiment(jobs[i].rc, jobs[i].dir);
        jobs[i].ok = true;
      } catch (const std::exception& e) {
        jobs[i].error = e.what();
      }
    }
  };
  if (workers <= 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (std::thread& th : pool) th.join();
  }
}

}  // namespace

std::string render_curve(const std::vector<CurveRow>& rows) {
  std::string s = "iter,epoch,ce,metric,total,lr\n";
  for (const CurveRow& r : rows) {
    s += std::to_string(r.iter);
    s += ",";
    s += std::to_string(r.epoch);
    s += ",";
    s += format_g17(r.loss.ce);
    s += ",";
    s += format_g17(r.loss.metric);
    s += ",";
    s += format_g17(r.loss.total);
    s += ",";
    s += format_g17(r.lr);
    s += "\n";
  }
  return s;
}

std::string render_metrics_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["overall_accuracy"] = report.overall_accuracy;
  j["per_class_accuracy"] = report.per_class_accuracy;
  j["mean_per_class_accuracy"] = report.mean_per_class_accuracy;
  j["confusion"] = report.confusion.counts;
  j["intra_class_compactness"] = report.intra_class_compactness;
  j["inter_class_separation"] = report.inter_class_separation;
  return j.dump(2) + "\n";
}

MetricsReport run_experiment(const RunConfig& rc, const std::string& out_dir) {
  make_dir(out_dir);
  const fs::path dir(out_dir);
  write_text_file((dir / "config_resolved.cfg").string(), render_config(rc));

  const Dataset full = gen_blobs(rc.data);
  RunRngs rngs = make_run_rngs(rc.train.seed);
  std::vector<std::string> warnings;
  auto [train_part, test_part] =
      split(full, rc.train_fraction, rngs.split_rng, &warnings);

  TrainState state = init_state(rc.model, rc.attention, rngs.init_rng);
  const std::vector<CurveRow> curve =
      train(state, train_part, rc.train, rngs.train_rng);
  const MetricsReport report = evaluate(state, test_part);

  write_text_file((dir / "curve.csv").string(), render_curve(curve));
  write_text_file((dir / "metrics.json").string(), render_metrics_json(report));
  save_checkpoint(state, (dir / "checkpoint.bin").string(),
                  (dir / "checkpoint.json").string());
  write_text_file((dir / "centers.csv").string(),
                  render_centers_csv(state.centers));
  write_text_file((dir / "confusion.csv").string(),
                  render_confusion_csv(report.confusion));

  for (const std::string& w : warnings) std::cout << "warning: " << w << "\n";
  if (state.clamp_warnings > 0)
    std::cout << "warning: " << state.clamp_warnings
              << " probability clamps during training\n";
  return report;
}

int cmd_gen_data(RunConfig rc, const std::string& out_path) {
  finalize_config(rc);
  const Dataset ds = gen_blobs(rc.data);
  const fs::path parent = fs::path(out_path).parent_path();
  if (!parent.empty()) make_dir(parent.string());
  save_csv(ds, out_path);
  std::cout << "wrote " << ds.size() << " samples x " << ds.dim()
            << " features to " << out_path << "\n";
  return 0;
}

int cmd_train(RunConfig rc, const std::string& out_dir) {
  finalize_config(rc);
  const MetricsReport report = run_experiment(rc, out_dir);
  std::cout << "train: overall_accuracy=" << format_g17(report.overall_accuracy)
            << " mean_per_class_accuracy="
            << format_g17(report.mean_per_class_accuracy) << " out=" << out_dir
            << "\n";
  return 0;
}

int cmd_eval(const std::string& checkpoint_path, const std::string& data_path) {
  const TrainState state = load_checkpoint(checkpoint_path);
  const Dataset ds = load_csv(data_path, state.model_cfg.k_classes);
  TC3L_CHECK(ds.dim() == state.model_cfg.d_in,
             "eval: dataset dimension does not match the checkpoint");
  const MetricsReport report = evaluate(state, ds);
  std::cout << render_metrics_json(report);
  return 0;
}

int cmd_sweep(RunConfig rc, const std::vector<double>& lambdas,
              const std::vector<NssMode>& nss_list,
              const std::string& out_dir) {
  TC3L_CHECK(!lambdas.empty(), "sweep: empty lambda list");
  TC3L_CHECK(!nss_list.empty(), "sweep: empty nss list");
  finalize_config(rc);
  make_dir(out_dir);
  std::vector<RunJob> jobs;
  for (NssMode nss : nss_list)
    for (double lambda : lambdas) {
      RunJob job;
      job.rc = rc;
      job.rc.train.nss = nss;
      job.rc.train.lambda = lambda;
      finalize_config(job.rc);
      job.tag = std::string(nss_name(nss)) + "," + short_double(lambda) + "," +
                margin_mode_name(job.rc.train.margin_mode);
      job.dir = (fs::path(out_dir) /
                 (std::string(nss_name(nss)) + "_lambda" + short_double(lambda)))
                    .string();
      jobs.push_back(std::move(job));
    }
  execute_jobs(jobs);
  std::string summary = "nss,lambda,margin_mode,overall_acc,mean_per_class_acc\n";
  std::string failures;
  for (const RunJob& job : jobs) {
    if (job.ok) {
      summary += job.tag + "," + format_g17(job.report.overall_accuracy) + "," +
                 format_g17(job.report.mean_per_class_accuracy) + "\n";
    } else {
      failures += job.dir + ": " + job.error + "\n";
      std::cerr << "sweep: run failed: " << job.dir << ": " << job.error << "\n";
    }
  }
  write_text_file((fs::path(out_dir) / "summary.csv").string(), summary);
  if (!failures.empty())
    write_text_file((fs::path(out_dir) / "failures.txt").string(), failures);
  std::cout << "sweep: " << jobs.size() << " runs, summary at "
            << (fs::path(out_dir) / "summary.csv").string() << "\n";
  return failures.empty() ? 0 : 2;
}

int cmd_ablate(RunConfig rc, const std::string& out_dir) {
  finalize_config(rc);
  TC3L_CHECK(rc.train.lambda > 0.0,
             "ablate: lambda must be positive for the metric pipelines");
  make_dir(out_dir);
  std::vector<RunJob> jobs;
  {
    RunJob base;
    base.rc = rc;
    base.rc.train.lambda = 0.0;
    base.rc.train.nss = NssMode::kNone;
    finalize_config(base.rc);
    base.tag = "baseline";
    base.dir = (fs::path(out_dir) / "baseline").string();
    jobs.push_back(std::move(base));
  }
  const NssMode modes[3] = {NssMode::kMs, NssMode::kNs, NssMode::kMm};
  const MarginMode pipelines[2] = {MarginMode::kFixed, MarginMode::kAdaptive};
  for (MarginMode pipeline : pipelines)
    for (NssMode nss : modes) {
      RunJob job;
      job.rc = rc;
      job.rc.train.nss = nss;
      job.rc.train.margin_mode = pipeline;
      finalize_config(job.rc);
      job.tag = std::string(margin_mode_name(pipeline)) + "_" + nss_name(nss);
      job.dir = (fs::path(out_dir) /
                 (std::string(nss_name(nss)) + "_" + margin_mode_name(pipeline)))
                    .string();
      jobs.push_back(std::move(job));
    }
  execute_jobs(jobs);
  for (const RunJob& job : jobs)
    if (!job.ok)
      std::cerr << "ablate: run failed: " << job.dir << ": " << job.error << "\n";
  // Table-shaped summary: one row per setting, one column per NSS mode;
  // the baseline value repeats across columns
  auto acc_of = [&](const std::string& tag) {
    for (const RunJob& job : jobs)
      if (job.tag == tag && job.ok)
        return format_g17(job.report.overall_accuracy);
    return std::string("nan");
  };
  std::string summary = "setting,ms,ns,mm\n";
  const std::string base = acc_of("baseline");
  summary += "baseline," + base + "," + base + "," + base + "\n";
  summary += "fixed," + acc_of("fixed_ms") + "," + acc_of("fixed_ns") + "," +
             acc_of("fixed_mm") + "\n";
  summary += "adaptive," + acc_of("adaptive_ms") + "," + acc_of("adaptive_ns") +
             "," + acc_of("adaptive_mm") + "\n";
  write_text_file((fs::path(out_dir) / "ablate_summary.csv").string(), summary);
  bool all_ok = true;
  for (const RunJob& job : jobs) all_ok = all_ok && job.ok;
  std::cout << "ablate: " << jobs.size() << " runs, summary at "
            << (fs::path(out_dir) / "ablate_summary.csv").string() << "\n";
  return all_ok ? 0 : 2;
}

}  // namespace tc3l
