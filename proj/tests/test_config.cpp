#include <gtest/gtest.h>

#include <fstream>

#include "hosc/config.hpp"
#include "hosc/error.hpp"
#include "support.hpp"

using namespace hosc;

TEST(Config, ParsesKeysAndComments) {
  const auto c = parse_config(
      "# a run\n"
      "name = demo\n"
      "dataset = star   # trailing comment\n"
      "grid_size = 64\n"
      "activation = hosc\n"
      "sharpness = 2, 4, 8, 16\n"
      "adaptive_sharpness = true\n"
      "epochs = 10\n"
      "batch_size = 128\n"
      "lr = 3e-4\n"
      "lr_every = 500\n");
  EXPECT_EQ(c.name, "demo");
  EXPECT_EQ(c.dataset, "star");
  EXPECT_EQ(c.grid_size, 64u);
  EXPECT_EQ(c.sharpness, (std::vector<double>{2, 4, 8, 16}));
  EXPECT_TRUE(c.adaptive_sharpness);
  EXPECT_EQ(c.batch_size, std::optional<std::size_t>(128));
  EXPECT_DOUBLE_EQ(c.lr, 3e-4);
  ASSERT_TRUE(std::holds_alternative<StepDecayLr>(c.lr_schedule));
  EXPECT_EQ(std::get<StepDecayLr>(c.lr_schedule).every, 500u);
}

TEST(Config, ParseErrorsCarryLineNumber) {
  try {
    parse_config("name = x\nepochs = many\n", "cfg.txt");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("cfg.txt:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_config("no equals sign\n"), ParseError);
  EXPECT_THROW(parse_config("colour = blue\n"), ParseError);
  EXPECT_THROW(parse_config("adaptive_sharpness = maybe\n"), ParseError);
  EXPECT_THROW(parse_config("epochs = -3\n"), ParseError);
  EXPECT_THROW(load_config("/nonexistent/run.cfg"), IoError);
}

TEST(Config, Validation) {
  ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  c.activation = "gelu";
  EXPECT_THROW(c.validate(), ArgumentError);
  c = ExperimentConfig{};
  c.sharpness = {1, 2};
  EXPECT_THROW(c.validate(), ArgumentError);
  c = ExperimentConfig{};
  c.activation = "relu";
  c.adaptive_sharpness = true;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = ExperimentConfig{};
  c.dataset = "image";
  EXPECT_THROW(c.validate(), ArgumentError);
  c = ExperimentConfig{};
  c.patch_size = 300;
  EXPECT_THROW(c.validate(), ArgumentError);
  c = ExperimentConfig{};
  c.lr = 0.0;
  EXPECT_THROW(c.validate(), ArgumentError);
}

TEST(Config, ResolvedModel) {
  ExperimentConfig c;
  c.hidden_layers = 3;
  c.sharpness = {4};
  const auto spec = c.mlp_spec(2, 1);
  ASSERT_EQ(spec.activation_per_layer.size(), 3u);
  EXPECT_EQ(std::get<Hosc>(spec.activation_per_layer[0]).freq, 30.0);
  EXPECT_EQ(std::get<Hosc>(spec.activation_per_layer[2]).freq, 1.0);
  EXPECT_EQ(std::get<Hosc>(spec.activation_per_layer[2]).sharp, 4.0);
  EXPECT_EQ(spec.init_scheme, InitScheme::SirenUniform);

  c.activation = "sine";
  EXPECT_EQ(std::get<Sine>(c.mlp_spec(2, 1).activation_per_layer[2]).freq, 30.0);
  c.activation = "relu";
  EXPECT_EQ(c.mlp_spec(2, 1).init_scheme, InitScheme::StandardUniform);
  c.init = "siren";
  EXPECT_EQ(c.mlp_spec(2, 1).init_scheme, InitScheme::SirenUniform);
}

TEST(Config, BatchSizeResolution) {
  ExperimentConfig c;
  EXPECT_EQ(c.effective_batch_size(1000), 1000u);
  EXPECT_EQ(c.effective_batch_size(256 * 256), 256u * 256u);
  EXPECT_EQ(c.effective_batch_size(1u << 20), 1u << 18);
  c.batch_size = 0;
  EXPECT_EQ(c.effective_batch_size(1u << 20), 1u << 20);
  c.batch_size = 100;
  EXPECT_EQ(c.effective_batch_size(50), 50u);
}

TEST(ConfigProperty, TextRoundTrip) {
  for (const auto& name : preset_names()) {
    auto c = preset(name);
    c.lr = 0.1 + 1e-17;  // exercise shortest round-trip formatting
    c.surface_noise = 1.0 / 3.0;
    EXPECT_EQ(parse_config(to_text(c)), c) << name;
  }
  ExperimentConfig plain;
  plain.first_freq = 12.5;
  plain.batch_size = 0;
  EXPECT_EQ(parse_config(to_text(plain)), plain);
}

TEST(Presets, EncodeRecipes) {
  EXPECT_EQ(preset_names().size(), 7u);
  const auto p16 = preset("patches-16");
  EXPECT_EQ(p16.patch_size, 16u);
  EXPECT_EQ(p16.n_patches, 100u);
  EXPECT_EQ(p16.image_size, 256u);
  EXPECT_EQ(p16.sharpness, (std::vector<double>{2, 4, 8, 16}));
  EXPECT_EQ(p16.resolved_first_freq(), 30.0);
  EXPECT_EQ(p16.resolved_freq(), 1.0);
  EXPECT_EQ(p16.epochs, 5000u);

  const auto star = preset("star-sdf");
  EXPECT_EQ(star.hidden_width, 512u);
  EXPECT_EQ(star.hidden_layers, 4u);

  const auto sdf = preset("sdf3d-adahosc");
  EXPECT_EQ(sdf.hidden_layers, 5u);
  EXPECT_EQ(sdf.hidden_width, 256u);
  EXPECT_EQ(sdf.epochs, 20u);
  EXPECT_TRUE(sdf.adaptive_sharpness);
  EXPECT_EQ(sdf.sharpness, (std::vector<double>{8}));

  const auto cam = preset("cameraman-1000");
  EXPECT_EQ(cam.epochs, 1000u);
  ASSERT_TRUE(std::holds_alternative<StepDecayLr>(cam.lr_schedule));
  EXPECT_EQ(std::get<StepDecayLr>(cam.lr_schedule), (StepDecayLr{0.1, 2000}));

  for (const auto& name : preset_names()) EXPECT_NO_THROW(preset(name).validate()) << name;
  EXPECT_THROW(preset("nope"), ArgumentError);
}

TEST(Config, LoadFromFile) {
  const auto dir = hosc::testing::scratch_dir("config");
  {
    std::ofstream f(dir / "run.cfg");
    f << "name = from_file\nepochs = 3\n";
  }
  const auto c = load_config(dir / "run.cfg");
  EXPECT_EQ(c.name, "from_file");
  EXPECT_EQ(c.epochs, 3u);
}
