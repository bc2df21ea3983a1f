#include "hosc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "hosc/error.hpp"
#include "hosc/netpbm.hpp"
#include "hosc/rng.hpp"

namespace hosc {

namespace {

std::string fmt17(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void shuffle(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(order[i - 1], order[j]);
  }
}

void require_finite_loss(double loss, std::size_t epoch) {
  if (!std::isfinite(loss)) {
    throw NumericError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
  }
}

}  // namespace

TrainResult train(Mlp& mlp, const SignalDataset& dataset, const TrainOptions& options) {
  if (dataset.size() == 0) throw ArgumentError("train: empty dataset");
  if (dataset.in_dim() != mlp.spec.in_dim || dataset.out_dim() != mlp.spec.out_dim) {
    throw DimensionError("train: dataset is " + std::to_string(dataset.in_dim()) + " -> " +
                         std::to_string(dataset.out_dim()) + " but network is " +
                         std::to_string(mlp.spec.in_dim) + " -> " + std::to_string(mlp.spec.out_dim));
  }
  if (options.eval_every == 0) throw ArgumentError("train: eval_every must be >= 1");
  validate(options.schedule);

  const std::size_t n = dataset.size();
  const std::size_t batch = options.batch_size == 0 ? n : std::min(options.batch_size, n);
  const bool full_batch = batch == n;
  AdamState adam = make_adam_state(mlp);
  Rng shuffle_rng = Rng(options.shuffle_seed).split(streams::kShuffle);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result{MetricsLog(mlp.spec.hidden_layers), 0.0, 0.0};

  auto step = [&](const Matrix& coords, const Matrix& targets, double lr, std::size_t epoch) {
    ForwardResult fwd;
    try {
      fwd = forward(mlp, coords);
    } catch (const NumericError& e) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    LossResult loss = mse_loss(fwd.output, targets);
    require_finite_loss(loss.loss, epoch);
    Gradients grads = backward(mlp, fwd.trace, loss.d_pred);
    add_weight_decay(mlp, options.weight_decay, grads);
    adam_step(mlp, grads, adam, lr);
    return loss.loss;
  };

  for (std::size_t e = 0; e < options.epochs; ++e) {
    const std::size_t epoch = e + 1;
    const double lr = lr_at(options.schedule, options.base_lr, e);
    const std::vector<double> sharpness = mlp.sharpness_values();
    double epoch_loss = 0.0;
    if (full_batch) {
      epoch_loss = step(dataset.coords, dataset.targets, lr, epoch);
    } else {
      shuffle(order, shuffle_rng);
      double weighted = 0.0;
      for (std::size_t begin = 0; begin < n; begin += batch) {
        const std::size_t end = std::min(n, begin + batch);
        const std::span<const std::size_t> idx(order.data() + begin, end - begin);
        const double loss = step(gather_rows(dataset.coords, idx), gather_rows(dataset.targets, idx), lr, epoch);
        weighted += loss * static_cast<double>(end - begin);
      }
      epoch_loss = weighted / static_cast<double>(n);
    }
    if (epoch % options.eval_every == 0 || epoch == options.epochs) {
      result.log.append({epoch, epoch_loss, psnr_from_mse(epoch_loss), lr, sharpness});
    }
  }

  const Matrix pred = predict_chunked(mlp, dataset.coords);
  result.final_loss = mse_loss(pred, dataset.targets).loss;
  require_finite_loss(result.final_loss, options.epochs);
  result.final_psnr = psnr_from_mse(result.final_loss);
  return result;
}

SignalDataset build_dataset(const ExperimentConfig& config) {
  Rng rng = Rng(config.data_seed).split(streams::kDataset);
  if (config.dataset == "image") return image_dataset(read_netpbm(config.image_path));
  if (config.dataset == "patches") {
    return image_dataset(gen_square_patches(rng, config.image_size, config.n_patches, config.patch_size).image);
  }
  if (config.dataset == "star") return star_dataset(config.star, config.grid_size, config.grid_size);
  if (config.dataset == "sdf3d") {
    return gen_sdf3d_samples(rng, parse_shape3d(config.shape3d), config.sdf_samples, config.surface_noise);
  }
  if (config.dataset == "signal1d") {
    return gen_signal1d(rng, config.signal_modes, config.signal_max_freq, config.signal_samples);
  }
  if (config.dataset == "points") return load_point_samples(config.points_path);
  throw ArgumentError("unknown dataset '" + config.dataset + "'");
}

void tune_allocator() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
}

Matrix predict_chunked(const Mlp& mlp, const Matrix& coords, std::size_t threads) {
  constexpr std::size_t kChunk = 16384;
  const std::size_t n = coords.rows();
  if (n <= kChunk) return predict(mlp, coords);
  Matrix out(n, mlp.spec.out_dim);
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  auto run_chunk = [&](std::size_t c) {
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(n, begin + kChunk);
    const Matrix part = predict(mlp, slice_rows(coords, begin, end));
    std::copy(part.values().begin(), part.values().end(),
              out.values().begin() + static_cast<std::ptrdiff_t>(begin * out.cols()));
  };
  threads = std::max<std::size_t>(1, std::min(threads, chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = t; c < chunks; c += threads) run_chunk(c);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

void render_image(const Mlp& mlp, std::size_t width, std::size_t height,
                  const std::filesystem::path& path, std::size_t threads) {
  if (mlp.spec.in_dim != 2) throw DimensionError("render_image: network must take 2D coordinates");
  if (mlp.spec.out_dim != 1 && mlp.spec.out_dim != 3) {
    throw DimensionError("render_image: network must output 1 or 3 channels");
  }
  const Matrix pred = predict_chunked(mlp, image_grid(width, height), threads);
  Image image(width, height, mlp.spec.out_dim);
  std::copy(pred.values().begin(), pred.values().end(), image.values.begin());
  write_netpbm(image, path);
}

Image sdf_slice_image(const Mlp& mlp, std::size_t axis, double offset, std::size_t resolution,
                      std::size_t threads) {
  if (mlp.spec.out_dim != 1) throw DimensionError("sdf slice: network must have a single output");
  if (resolution == 0) throw ArgumentError("sdf slice: resolution must be >= 1");
  const Matrix plane = image_grid(resolution, resolution);
  Matrix coords;
  if (mlp.spec.in_dim == 2) {
    coords = plane;
  } else if (mlp.spec.in_dim == 3) {
    if (axis > 2) throw ArgumentError("sdf slice: axis must be 0, 1 or 2");
    coords = Matrix(plane.rows(), 3);
    for (std::size_t i = 0; i < plane.rows(); ++i) {
      std::size_t k = 0;
      for (std::size_t d = 0; d < 3; ++d) coords(i, d) = d == axis ? offset : plane(i, k++);
    }
  } else {
    throw DimensionError("sdf slice: network must take 2D or 3D coordinates");
  }
  const Matrix pred = predict_chunked(mlp, coords, threads);
  Image image(resolution, resolution, 1);
  for (std::size_t i = 0; i < image.values.size(); ++i) {
    image.values[i] = 0.5 + 0.5 * std::clamp(pred(i, 0), -1.0, 1.0);
  }
  return image;
}

void render_sdf_slice(const Mlp& mlp, std::size_t axis, double offset, std::size_t resolution,
                      const std::filesystem::path& path, std::size_t threads) {
  write_netpbm(sdf_slice_image(mlp, axis, offset, resolution, threads), path);
}

namespace {

// Analytic reference field for datasets that have one.
std::optional<std::function<double(std::span<const double>)>> analytic_field(const ExperimentConfig& config) {
  if (config.dataset == "star") {
    const StarShape star = config.star;
    return [star](std::span<const double> p) { return sdf_star({p[0], p[1]}, star); };
  }
  if (config.dataset == "sdf3d") {
    const Shape3d shape = parse_shape3d(config.shape3d);
    return [shape](std::span<const double> p) { return sdf_shape3d(shape, {p[0], p[1], p[2]}); };
  }
  return std::nullopt;
}

std::size_t iou_resolution(const ExperimentConfig& config) {
  return config.iou_resolution != 0 ? config.iou_resolution : 256;
}

std::optional<double> analytic_iou(const Mlp& mlp, const ExperimentConfig& config, std::size_t threads) {
  const auto field = analytic_field(config);
  if (!field) return std::nullopt;
  if (config.dataset == "star" && config.iou_resolution == 0) {
    // the raster the star was sampled on; an explicit resolution gives a vertex grid instead
    const SignalDataset ds = star_dataset(config.star, config.grid_size, config.grid_size);
    const Matrix pred = predict_chunked(mlp, ds.coords, threads);
    return iou_occupancy(pred.values(), ds.targets.values());
  }
  const std::size_t dims = config.dataset == "star" ? 2 : 3;
  const std::size_t res = iou_resolution(config);
  return iou_occupancy(eval_grid(mlp, res, dims, threads), sample_grid(*field, res, dims));
}

}  // namespace

EvalReport evaluate_model(const Mlp& mlp, const ExperimentConfig& config, std::size_t threads) {
  const SignalDataset dataset = build_dataset(config);
  if (dataset.in_dim() != mlp.spec.in_dim || dataset.out_dim() != mlp.spec.out_dim) {
    throw DimensionError("eval: model does not match the dataset's dimensions");
  }
  const Matrix pred = predict_chunked(mlp, dataset.coords, threads);
  EvalReport report;
  report.loss = mse_loss(pred, dataset.targets).loss;
  report.psnr = psnr_from_mse(report.loss);
  report.iou = analytic_iou(mlp, config, threads);
  return report;
}

RunResult run_experiment(const ExperimentConfig& config, std::size_t threads) {
  config.validate();
  if (config.output_dir.empty()) throw ArgumentError("run_experiment: output_dir is not set");
  const std::filesystem::path out = config.output_dir;
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw IoError("cannot create output directory " + out.string() + ": " + ec.message());

  const SignalDataset dataset = build_dataset(config);
  Mlp mlp = init_mlp(config.mlp_spec(dataset.in_dim(), dataset.out_dim()));

  TrainOptions options;
  options.epochs = config.epochs;
  options.batch_size = config.effective_batch_size(dataset.size());
  options.base_lr = config.lr;
  options.schedule = config.lr_schedule;
  options.weight_decay = config.weight_decay;
  options.shuffle_seed = config.seed;
  options.eval_every = config.eval_every;
  TrainResult trained = train(mlp, dataset, options);

  RunResult result;
  result.log = std::move(trained.log);
  result.final_loss = trained.final_loss;
  result.final_psnr = trained.final_psnr;
  result.iou = analytic_iou(mlp, config, threads);

  {
    std::ofstream cfg(out / "config.txt", std::ios::trunc);
    cfg << to_text(config);
    if (!cfg) throw IoError("failed writing " + (out / "config.txt").string());
  }
  result.metrics_path = out / "metrics.csv";
  result.log.write_csv(result.metrics_path);
  result.checkpoint_path = out / "model.ckpt";
  save_checkpoint(mlp, result.checkpoint_path);

  const std::size_t render = config.render_size != 0 ? config.render_size
                             : dataset.grid_width != 0 ? dataset.grid_width
                                                       : 256;
  if (dataset.kind == SignalKind::Image) {
    const char* ext = dataset.out_dim() == 3 ? ".ppm" : ".pgm";
    const auto recon = out / (std::string("recon") + ext);
    render_image(mlp, dataset.grid_width, dataset.grid_height, recon, threads);
    const auto target = out / (std::string("target") + ext);
    write_netpbm(dataset_image(dataset), target);
    const auto residual = out / "residual.pgm";
    write_netpbm(residual_image(predict_chunked(mlp, dataset.coords, threads), dataset.targets,
                                dataset.grid_width, dataset.grid_height),
                 residual);
    result.rendered = {recon, target, residual};
  } else if (dataset.kind == SignalKind::Sdf2d || dataset.kind == SignalKind::Sdf3d) {
    const auto slice = out / "sdf_slice.pgm";
    render_sdf_slice(mlp, 2, 0.0, render, slice, threads);
    result.rendered = {slice};
  } else {
    const auto curve = out / "recon.csv";
    std::ofstream csv(curve, std::ios::trunc);
    const Matrix pred = predict_chunked(mlp, dataset.coords, threads);
    csv << "x,target,prediction\n";
    csv.precision(17);
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      csv << dataset.coords(i, 0) << ',' << dataset.targets(i, 0) << ',' << pred(i, 0) << '\n';
    }
    if (!csv) throw IoError("failed writing " + curve.string());
    result.rendered = {curve};
  }

  {
    std::ofstream summary(out / "result.txt", std::ios::trunc);
    summary << "epochs = " << config.epochs << '\n'
            << "parameters = " << mlp.parameter_count() << '\n'
            << "final_loss = " << fmt17(result.final_loss) << '\n'
            << "final_psnr = " << fmt17(result.final_psnr) << '\n';
    if (result.iou) summary << "iou = " << fmt17(*result.iou) << '\n';
    const auto sharp = mlp.sharpness_values();
    for (std::size_t l = 0; l < sharp.size(); ++l) summary << "sharp_" << l << " = " << fmt17(sharp[l]) << '\n';
    if (!summary) throw IoError("failed writing " + (out / "result.txt").string());
  }

  result.model = std::move(mlp);
  return result;
}

namespace {

bool same_dataset(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.dataset == b.dataset && a.image_path == b.image_path && a.image_size == b.image_size &&
         a.n_patches == b.n_patches && a.patch_size == b.patch_size && a.grid_size == b.grid_size &&
         a.star.points == b.star.points && a.star.outer_radius == b.star.outer_radius &&
         a.star.inner_radius == b.star.inner_radius && a.shape3d == b.shape3d &&
         a.sdf_samples == b.sdf_samples && a.surface_noise == b.surface_noise &&
         a.signal_modes == b.signal_modes && a.signal_max_freq == b.signal_max_freq &&
         a.signal_samples == b.signal_samples && a.points_path == b.points_path;
}

}  // namespace

ComparisonResult compare_runs(std::vector<ExperimentConfig> configs, std::uint64_t data_seed,
                              const std::filesystem::path& out_root, std::size_t threads,
                              bool allow_dataset_mismatch) {
  if (configs.empty()) throw ArgumentError("compare_runs: no configs");
  for (std::size_t i = 1; i < configs.size() && !allow_dataset_mismatch; ++i) {
    if (!same_dataset(configs[0], configs[i])) {
      throw ArgumentError("compare_runs: config '" + configs[i].name + "' uses a different dataset than '" +
                          configs[0].name + "'");
    }
  }

  // unique directory names
  std::map<std::string, int> seen;
  for (auto& c : configs) {
    const int count = seen[c.name]++;
    if (count > 0) c.name += "-" + std::to_string(count);
    c.data_seed = data_seed;
    c.output_dir = (out_root / c.name).string();
  }

  ComparisonResult result;
  for (const auto& c : configs) {
    result.runs.push_back(run_experiment(c, threads));
    const auto& run = result.runs.back();
    ComparisonRow row{c.name, c.activation, run.final_loss, run.final_psnr, 0.0, run.iou};
    row.max_psnr = run.final_psnr;
    for (const auto& r : run.log.records()) row.max_psnr = std::max(row.max_psnr, r.psnr.value_or(0.0));
    result.summary.push_back(row);
  }

  std::map<std::size_t, std::vector<std::optional<double>>> table;
  for (std::size_t k = 0; k < result.runs.size(); ++k) {
    for (const auto& r : result.runs[k].log.records()) {
      auto& cells = table[r.epoch];
      cells.resize(result.runs.size());
      cells[k] = r.psnr;
    }
  }
  result.comparison_csv = out_root / "comparison.csv";
  {
    std::ofstream csv(result.comparison_csv, std::ios::trunc);
    if (!csv) throw IoError("cannot write " + result.comparison_csv.string());
    csv << "epoch";
    for (const auto& c : configs) csv << ",psnr_" << c.name;
    csv << '\n';
    csv.precision(17);
    for (const auto& [epoch, cells] : table) {
      csv << epoch;
      for (std::size_t k = 0; k < configs.size(); ++k) {
        csv << ',';
        if (k < cells.size() && cells[k]) csv << *cells[k];
      }
      csv << '\n';
    }
    if (!csv) throw IoError("failed writing " + result.comparison_csv.string());
  }

  result.summary_csv = out_root / "summary.csv";
  {
    std::ofstream csv(result.summary_csv, std::ios::trunc);
    if (!csv) throw IoError("cannot write " + result.summary_csv.string());
    csv << "name,activation,final_loss,final_psnr,max_psnr,iou\n";
    csv.precision(17);
    for (const auto& row : result.summary) {
      csv << row.name << ',' << row.activation << ',' << row.final_loss << ',' << row.final_psnr << ','
          << row.max_psnr << ',';
      if (row.iou) csv << *row.iou;
      csv << '\n';
    }
    if (!csv) throw IoError("failed writing " + result.summary_csv.string());
  }
  return result;
}

}  // namespace hosc
